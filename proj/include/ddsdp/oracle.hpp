#pragma once

// Reference PSD solver for small instances (N ≤ 30). Damped Newton on the
// log-det barrier in symmetric coordinates (svec), assembled densely and kept
// independent of the block-coordinate machinery it is used to check.

#include "ddsdp/problem.hpp"
#include "ddsdp/symmat.hpp"

namespace ddsdp::oracle {

inline constexpr Eigen::Index kMaxOrder = 30;

struct OraclePoint {
  double t = 0.0;
  Mat x;
  /// Central path: γ with X⁻¹ = t(C − Σγ_iA_i).
  /// Analytic center: β with X⁻¹ = −τC − Σβ_iA_i.
  Vec duals;
  /// Cost-row dual of an analytic centering (t = −τ); zero on the central path.
  double tau = 0.0;
  double cost = 0.0;
  double decrement = 0.0;
  int iterations = 0;
};

struct OracleOptions {
  double tol = 1e-9;
  int max_iterations = 500;
  double alpha = 0.25;
  double beta = 0.5;
};

/// svec(X⁻¹), the gradient of log det X in svec coordinates.
Vec logdet_gradient(const Mat& x);

/// Matrix of the quadratic form (U, V) ↦ Tr(X⁻¹UX⁻¹V) in svec coordinates,
/// i.e. the Hessian of −log det X.
Mat logdet_hessian(const Mat& x);

/// X_t = argmin t·Tr(CX) − log det X over the affine constraints.
OraclePoint central_path_point(const NormalizedSdp& norm, double t, const Mat& x_start,
                               const OracleOptions& options = {});

/// argmin −log det X over the constraints and Tr(CX) = cost_level.
OraclePoint analytic_center(const NormalizedSdp& norm, double cost_level, const Mat& x_start,
                            const OracleOptions& options = {});

struct ReferenceResult {
  /// Normalized objective Tr(CX).
  double objective = 0.0;
  Mat x;
  double t = 0.0;
};

/// Barrier method from t = N, t ← 10t, until N/t ≤ eps (normalized units).
ReferenceResult reference_solve(const NormalizedSdp& norm, double eps, const Mat& x0,
                                const OracleOptions& options = {});

}  // namespace ddsdp::oracle
