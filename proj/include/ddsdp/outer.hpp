#pragma once

// Decrease-and-center driver. Each outer phase takes s_d decrease steps, then
// re-centers at the reached cost level until the centering surrogate is below
// eps_c, and certifies the duality gap from the centering dual.

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ddsdp/cones.hpp"
#include "ddsdp/inner_solvers.hpp"
#include "ddsdp/problem.hpp"
#include "ddsdp/symmat.hpp"

namespace ddsdp {

enum class PhaseKind { kDecrease, kCentering };
std::string to_string(PhaseKind kind);

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// One inner iteration, or a phase boundary when `boundary` is set.
struct TraceRecord {
  int phase = 0;
  PhaseKind kind = PhaseKind::kDecrease;
  int inner_iter = 0;
  /// Normalized cost Tr(C_n X).
  double cost = kNaN;
  double lambda0 = kNaN;
  double tau = kNaN;
  double t_lo = kNaN;
  double t_hi = kNaN;
  /// Certified gap in original objective units.
  double gap = kNaN;
  double millis = 0.0;
  bool boundary = false;
};

using TraceSink = std::function<void(const TraceRecord&)>;

struct SolverConfig {
  ConeKind cone = ConeKind::kSDD;
  int s_d = 5;
  /// Target gap in original objective units.
  double eps_g = 1e-3;
  double eps_c = 1e-2;
  LineSearchConfig ls;
  int max_phases = 500;
  /// Centering iterations per phase; 0 uses the L_hat budget from the
  /// current estimates.
  int max_centering_iters = 0;
  /// Normalized cost below which a decrease step reports unboundedness.
  double cost_floor = -1e10;
  /// Smallest centering target tried when tightening to certify.
  double eps_c_floor = 1e-12;
  /// Keep the iterate at every phase exit in the report.
  bool keep_iterates = false;
  TraceSink sink;

  void validate() const;
};

struct TheoryConstants {
  double Phi = 0.0;
  double PhiPrime = 0.0;
  double xi = 0.0;
  double eta = 0.0;
  double chi_hat = 0.0;
  long kappa_hat = 0;
  long L_hat = 0;
  double eps_c_star = 0.0;
  double Theta_hat = 0.0;
};

TheoryConstants theory_constants(Eigen::Index n, ConeKind cone, const LineSearchConfig& ls, double eps_c,
                                 double eps_g, double theta_hat, double t0, double logdet_span);

struct PhaseTrace {
  int phase = 0;
  PhaseKind kind = PhaseKind::kDecrease;
  int inner_iterations = 0;
  double cost_before = kNaN;
  double cost_after = kNaN;
  /// Decrease: cost after each step. Centering: cost at each check.
  std::vector<double> step_costs;
  /// Centering only: log|X_l| and λ_φ(𝓜₀) at each check.
  std::vector<double> logdet;
  std::vector<double> lambda0;
  double tau = kNaN;
  double t_lo = kNaN;
  double t_hi = kNaN;
  /// Centering surrogate reached at exit.
  double surrogate = kNaN;
  /// Centering target finally used (tightened when certifying).
  double eps_c_used = kNaN;
  double gap = kNaN;
  double millis = 0.0;
  /// Iterate at phase exit (only with keep_iterates).
  Mat x;
};

enum class TerminationReason { kGapReached, kMaxPhases, kSubproblemFailure, kUnbounded };
std::string to_string(TerminationReason reason);

struct SolveReport {
  Mat x;
  /// Original (minimization) objective of x.
  double objective = kNaN;
  /// Normalized cost Tr(C_n x).
  double normalized_cost = kNaN;
  /// Certified gap in original units; infinite until a certificate exists.
  double certified_gap = std::numeric_limits<double>::infinity();
  double normalized_gap = std::numeric_limits<double>::infinity();
  std::vector<PhaseTrace> phases;
  TheoryConstants constants;
  TerminationReason reason = TerminationReason::kMaxPhases;
  /// Diagnostic for SubproblemFailure / Unbounded.
  std::string message;
  /// The failure was a centering budget overrun.
  bool budget_exhausted = false;
  int total_inner_iterations = 0;
  double millis = 0.0;
};

/// Runs the decrease-and-center loop from the strictly feasible X0.
/// Subproblem failures end the run with the matching reason; only an
/// infeasible start throws.
SolveReport solve(const NormalizedSdp& norm, const Mat& x0, const SolverConfig& cfg);

/// Throws PhaseBudgetExceeded, SubproblemFailure or Unbounded unless the
/// report reached its gap.
void require_gap(const SolveReport& report);

/// PSD analytic-centering Newton step at Y = I in the basis of X: the duals of
/// X⁻¹ ≈ −τC − Σβ_iA_i and the step length ‖ΔY‖_F.
struct PsdDual {
  double tau = kNaN;
  Vec beta;
  double decrement = kNaN;
};
PsdDual psd_centering_dual(const NormalizedSdp& norm, const CholFactor<double>& u);

struct CenteringResult {
  Mat x;
  double tau = kNaN;
  double lambda0 = kNaN;
  double surrogate = kNaN;
  Vec beta;
  int iterations = 0;
  std::vector<double> logdet;
  std::vector<double> lambda0_history;
  std::vector<double> costs;
};

/// Centering iterations at the cost level of X_in until the surrogate
/// (N−1−α)λ_φ(𝓜₀)² ≤ eps_c inside the quadratic regime. `on_iteration`
/// receives each check with its τ and surrogate.
CenteringResult centering_phase(
    const NormalizedSdp& norm, const Mat& x_in, ConeKind cone, const LineSearchConfig& ls, double eps_c,
    int max_iterations,
    const std::function<void(int iteration, const Mat& x, double cost, double lambda0, const PsdDual& dual,
                             double surrogate)>&
        on_iteration = {});

struct TBounds {
  double t_lo = kNaN;
  double t_hi = kNaN;
};

/// −τ ∓ ((1 + 1/(αβ))eps_c + √(2eps_c))·‖X_L⁻¹‖_F.
TBounds t_bounds(double tau, double eps_c, const Mat& x_l, const LineSearchConfig& ls);

/// N/t_lo; throws NonPositiveT when t_lo ≤ 0.
double certified_gap(double t_lo, Eigen::Index n);

/// Uᵀ(I − √Φ·Q/‖Q‖_F)U with Q = U⁻ᵀC_nU⁻¹ and X_center = UᵀU.
Mat hat_x(const NormalizedSdp& norm, const Mat& x_center, double phi);

/// Gap tolerance handed to a decrease step taken from the basis U: a tenth of
/// √Φ/‖Q‖_F, below the cost margin the cone inclusion leaves over hat_x.
double decrease_gap_tolerance(const NormalizedSdp& norm, const CholFactor<double>& u, ConeKind cone);

/// Strictly feasible starting point; NoInteriorPointFound otherwise.
Mat phase1_init(const NormalizedSdp& norm);

}  // namespace ddsdp
