#pragma once

// Subproblem engines. Both run feasible-start Newton in block coordinates m
// over the affine slice {m : J m = rhs}, starting from the identity blocks
// (which map to the previous iterate and are always feasible):
//
//   centering_solve: min −φ(m)                      (analytic centering)
//   decrease_solve:  min c̃ᵀm  via  min μ·c̃ᵀm − φ(m), μ ↑  (barrier path)

#include <limits>
#include <optional>
#include <vector>

#include "ddsdp/cones.hpp"
#include "ddsdp/problem.hpp"
#include "ddsdp/symmat.hpp"

namespace ddsdp {

struct AffineSlice {
  Eigen::Index n = 0;
  /// Ã_i = U A_i Uᵀ.
  std::vector<Mat> constraints;
  /// C̃ = U C Uᵀ.
  Mat cost;
  /// Coordinate-space row of m ↦ Tr(C̃ Ψ(m)).
  Vec cost_coords;
  /// One row per constraint, plus the cost-level row last when present.
  Mat jacobian;
  Vec rhs;
  bool has_cost_row = false;

  Eigen::Index rows() const { return jacobian.rows(); }
};

/// Transforms the normalized data by U. With a cost level the slice also pins
/// Tr(C̃Ψ(m)) to Tr(C̃) = Tr(C X_prev). Right-hand sides are Tr(Ã_i), so the
/// identity blocks are feasible.
AffineSlice build_slice(const NormalizedSdp& norm, const CholFactor<double>& u,
                        std::optional<double> cost_level);

struct LineSearchConfig {
  double alpha = 0.25;
  double beta = 0.5;
  int max_backtracks = 80;

  double eta() const { return (1.0 - 2.0 * alpha) / 4.0; }
  void validate() const;
};

struct KktSolution {
  Vec step;
  Vec duals;
};

/// Solves [H Jᵀ; J 0][Δ; ν] = [−g; 0] through the Schur complement J H⁻¹ Jᵀ.
/// `hess` holds positive definite 3×3 blocks.
KktSolution newton_kkt_solve(const BlockHessian<double>& hess, const Mat& jacobian, const Vec& gradient);

struct NewtonState {
  BlockSet<double> blocks;
  /// Value of the minimized function (barrier objective).
  double objective = 0.0;
  /// Tr(C̃ Ψ(m)).
  double cost = 0.0;
  Vec gradient;
  Vec step;
  double decrement = 0.0;
  /// Decrement at the identity blocks, the first iterate.
  double initial_decrement = 0.0;
  /// Duals of the slice rows from the last KKT solve.
  Vec duals;
  /// Cost-row dual rescaled to the log-det convention X⁻¹ ≈ −τC − Σβ_iA_i
  /// (τ = −ν_cost/(N−1)); NaN without a cost row.
  double tau = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  /// decrease_solve: ν/μ of the last completed stage.
  double barrier_gap = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> objective_history;
  std::vector<double> decrement_history;

  explicit NewtonState(Eigen::Index n) : blocks(n) {}
};

struct CenteringOptions {
  double tol_lambda = 1e-8;
  int max_iterations = 200;
};

NewtonState centering_solve(const AffineSlice& slice, ConeKind kind, const LineSearchConfig& ls,
                            const CenteringOptions& options = {});

/// λ_φ(𝓜₀): the Newton decrement of −φ over the slice at the identity blocks.
double centering_decrement(const AffineSlice& slice, ConeKind kind);

struct DecreaseOptions {
  /// Subproblem cost below which the slice is declared unbounded.
  double cost_floor = -1e10;
  double mu_factor = 10.0;
  double newton_tol = 1e-8;
  int max_newton_per_stage = 200;
};

/// Path-following on μ·c̃ᵀm − φ(m) until 2·C(N,2)/μ ≤ gap_tol. A stage that
/// stalls against the interiority tolerance ends the path at the previous
/// stage; barrier_gap then exceeds gap_tol.
NewtonState decrease_solve(const AffineSlice& slice, ConeKind kind, const LineSearchConfig& ls, double gap_tol,
                           const DecreaseOptions& options = {});

struct Iterate {
  Mat x;
  double cost = 0.0;
};

/// X = Uᵀ Ψ(m) U and its normalized cost Tr(C X).
Iterate extract_iterate(const NewtonState& state, const CholFactor<double>& u, const NormalizedSdp& norm);

}  // namespace ddsdp
