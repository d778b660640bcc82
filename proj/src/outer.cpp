#include "ddsdp/outer.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <chrono>
#include <cmath>

namespace ddsdp {

std::string to_string(PhaseKind kind) { return kind == PhaseKind::kDecrease ? "decrease" : "centering"; }

std::string to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::kGapReached:
      return "GapReached";
    case TerminationReason::kMaxPhases:
      return "MaxPhases";
    case TerminationReason::kSubproblemFailure:
      return "SubproblemFailure";
    case TerminationReason::kUnbounded:
      return "Unbounded";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  ls.validate();
  if (!(eps_g > 0.0)) throw Error("eps_g must be positive");
  if (!(eps_c > 0.0)) throw Error("eps_c must be positive");
  if (s_d < 1) throw Error("s_d must be at least 1");
  if (max_phases < 1) throw Error("max_phases must be at least 1");
  if (max_centering_iters < 0) throw Error("max_centering_iters must be non-negative");
  if (!(eps_c_floor > 0.0) || eps_c_floor > eps_c) throw Error("eps_c_floor must lie in (0, eps_c]");
}

namespace {

double phi_prime(Eigen::Index n, ConeKind cone) {
  return cone == ConeKind::kDD ? 2.0 / (static_cast<double>(n) + 1.0) : 1.0;
}

double phi_used(Eigen::Index n, ConeKind cone) { return 0.81 * phi_prime(n, cone); }

}  // namespace

TheoryConstants theory_constants(Eigen::Index n, ConeKind cone, const LineSearchConfig& ls, double eps_c,
                                 double eps_g, double theta_hat, double t0, double logdet_span) {
  if (n < 2) throw DimensionMismatch("theory_constants: N must be at least 2");
  const double nd = static_cast<double>(n);
  const double r = std::sqrt(nd - 1.0);
  TheoryConstants k;
  k.eta = ls.eta();
  k.xi = (ls.alpha * ls.beta / r) * k.eta * k.eta / (r + k.eta);
  k.PhiPrime = phi_prime(n, cone);
  k.Phi = 0.81 * k.PhiPrime;
  const double z = (std::sqrt(k.PhiPrime) - std::sqrt(k.Phi)) / (std::sqrt(nd) + std::sqrt(k.PhiPrime));
  k.eps_c_star = -std::log1p(-z * z * z);
  k.Theta_hat = theta_hat;
  const double root = nd * std::sqrt(1.0 + theta_hat);
  k.chi_hat = root / (root - std::sqrt(k.Phi));
  const double kappa = (std::log(nd / eps_g) - std::log(t0)) / std::log(k.chi_hat);
  k.kappa_hat = std::max(0L, static_cast<long>(std::ceil(kappa)));
  const double l1 = std::ceil((logdet_span - eps_c) / k.xi);
  const double l2 =
      eps_c >= k.eta * k.eta
          ? 0.0
          : std::ceil((std::log(eps_c) - std::log(k.eta * k.eta)) / (std::log(nd - 1.0 - ls.alpha) - std::log(nd - 1.0)));
  k.L_hat = static_cast<long>(std::max(l1, 0.0) + l2);
  return k;
}

PsdDual psd_centering_dual(const NormalizedSdp& norm, const CholFactor<double>& u) {
  const Eigen::Index n = norm.n;
  const Eigen::Index dim = n * (n + 1) / 2;
  // Least squares min ‖I − Σν_iÃ_i − ν_cC̃‖_F; the residual is the Newton step.
  Mat basis(dim, norm.m + 1);
  for (Eigen::Index i = 0; i < norm.m; ++i)
    basis.col(i) = svec(congruence(norm.constraints[static_cast<std::size_t>(i)], u, Direction::kForward));
  basis.col(norm.m) = svec(congruence(norm.cost, u, Direction::kForward));
  const Vec target = svec(Mat::Identity(n, n));
  Eigen::ColPivHouseholderQR<Mat> qr(basis);
  const Vec nu = qr.solve(target);
  PsdDual out;
  out.tau = -nu(norm.m);
  out.beta = -nu.head(norm.m);
  out.decrement = (target - basis * nu).norm();
  return out;
}

CenteringResult centering_phase(
    const NormalizedSdp& norm, const Mat& x_in, ConeKind cone, const LineSearchConfig& ls, double eps_c,
    int max_iterations,
    const std::function<void(int, const Mat&, double, double, const PsdDual&, double)>& on_iteration) {
  ls.validate();
  const double nd = static_cast<double>(norm.n);
  const double regime = ls.eta() / std::sqrt(nd - 1.0);
  const double level = frob_inner(norm.cost, x_in);
  CenteringResult out;
  out.x = x_in;
  for (int it = 1;; ++it) {
    const CholFactor<double> u = cholesky(out.x);
    const AffineSlice slice = build_slice(norm, u, level);
    const double lambda0 = centering_decrement(slice, cone);
    const PsdDual dual = psd_centering_dual(norm, u);
    const double surrogate = lambda0 <= regime ? (nd - 1.0 - ls.alpha) * lambda0 * lambda0 : kNaN;
    const double cost = frob_inner(norm.cost, out.x);
    out.iterations = it;
    out.logdet.push_back(log_det(u));
    out.lambda0_history.push_back(lambda0);
    out.costs.push_back(cost);
    out.lambda0 = lambda0;
    out.surrogate = surrogate;
    out.tau = dual.tau;
    out.beta = dual.beta;
    if (on_iteration) on_iteration(it, out.x, cost, lambda0, dual, surrogate);
    if (surrogate <= eps_c) break;
    if (it >= max_iterations) throw CenteringBudgetExceeded(max_iterations);
    const NewtonState state = centering_solve(slice, cone, ls);
    out.x = symmetrized(extract_iterate(state, u, norm).x);
  }
  return out;
}

TBounds t_bounds(double tau, double eps_c, const Mat& x_l, const LineSearchConfig& ls) {
  const double inv_norm = inverse_from_factor(cholesky(x_l)).norm();
  const double width = ((1.0 + 1.0 / (ls.alpha * ls.beta)) * eps_c + std::sqrt(2.0 * eps_c)) * inv_norm;
  return {-tau - width, -tau + width};
}

double certified_gap(double t_lo, Eigen::Index n) {
  if (!(t_lo > 0.0)) throw NonPositiveT();
  return static_cast<double>(n) / t_lo;
}

Mat hat_x(const NormalizedSdp& norm, const Mat& x_center, double phi) {
  const CholFactor<double> u = cholesky(x_center);
  const Mat q = congruence(norm.cost, u, Direction::kInverse);
  const Mat y = Mat::Identity(norm.n, norm.n) - std::sqrt(phi) * q / q.norm();
  return lift(y, u);
}

double decrease_gap_tolerance(const NormalizedSdp& norm, const CholFactor<double>& u, ConeKind cone) {
  const Mat q = congruence(norm.cost, u, Direction::kInverse);
  return 0.1 * std::sqrt(phi_used(norm.n, cone)) / q.norm();
}

Mat phase1_init(const NormalizedSdp& norm) {
  const Eigen::Index n = norm.n;
  const double tol = 1e-9 * std::max(1.0, norm.rhs.size() ? norm.rhs.lpNorm<Eigen::Infinity>() : 0.0);
  const Mat eye = Mat::Identity(n, n);
  if (constraint_residual(norm, eye) <= tol) return eye;

  auto positive = [](const Mat& x) {
    try {
      cholesky(x);
      return true;
    } catch (const NotPositiveDefinite&) {
      return false;
    }
  };
  Mat x_ls = Mat::Zero(n, n);
  Mat p = eye;
  for (Eigen::Index i = 0; i < norm.m; ++i) {
    const Mat& a = norm.constraints[static_cast<std::size_t>(i)];
    x_ls += norm.rhs(i) * a;
    p -= frob_inner(a, eye) * a;
  }
  if (constraint_residual(norm, x_ls) > 1e-6 * std::max(1.0, norm.rhs.lpNorm<Eigen::Infinity>()))
    throw NoInteriorPointFound("constraints are inconsistent");
  if (positive(x_ls)) return x_ls;
  if (p.norm() <= 1e-12) throw NoInteriorPointFound("no constraint-free direction to move into the interior");
  const double base = std::max(1.0, x_ls.norm()) / p.norm();
  double s = base;
  for (int k = 0; k < 60; ++k, s *= 2.0) {
    if (!positive(x_ls + s * p)) continue;
    // Shrink toward the smallest s that still gives a positive definite point.
    double lo = k == 0 ? 0.0 : s / 2.0;
    double hi = s;
    for (int b = 0; b < 40; ++b) {
      const double mid = 0.5 * (lo + hi);
      (positive(x_ls + mid * p) ? hi : lo) = mid;
    }
    // Twice the threshold keeps a margin from the boundary.
    const Mat x = x_ls + std::min(2.0 * hi, s) * p;
    return positive(x) ? x : Mat(x_ls + s * p);
  }
  throw NoInteriorPointFound("no positive definite point along the constraint-free directions; supply X0");
}

void require_gap(const SolveReport& report) {
  switch (report.reason) {
    case TerminationReason::kGapReached:
      return;
    case TerminationReason::kMaxPhases:
      throw PhaseBudgetExceeded("phase budget exhausted before reaching the gap target");
    case TerminationReason::kUnbounded:
      throw Unbounded(report.message);
    case TerminationReason::kSubproblemFailure:
      throw SubproblemFailure(report.phases.empty() ? 0 : report.phases.back().phase, report.message);
  }
}

SolveReport solve(const NormalizedSdp& norm, const Mat& x0, const SolverConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = norm.n;
  const double nd = static_cast<double>(n);
  if (x0.rows() != n || x0.cols() != n) throw DimensionMismatch("solve: X0 order differs from problem order");
  const double residual = constraint_residual(norm, x0);
  if (residual > 1e-8 * std::max(1.0, norm.rhs.size() ? norm.rhs.lpNorm<Eigen::Infinity>() : 0.0))
    throw InfeasibleStart("X0 violates the constraints by " + std::to_string(residual));
  try {
    cholesky(x0);
  } catch (const NotPositiveDefinite&) {
    throw InfeasibleStart("X0 is not positive definite");
  }

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  };
  auto emit = [&](const TraceRecord& r) {
    if (cfg.sink) cfg.sink(r);
  };

  SolveReport report;
  Mat x = x0;
  auto finish = [&](TerminationReason reason) {
    report.reason = reason;
    report.x = x;
    report.normalized_cost = frob_inner(norm.cost, x);
    report.objective = recover_objective(norm, x);
    report.millis = elapsed();
  };

  if (norm.degenerate()) {
    report.certified_gap = 0.0;
    report.normalized_gap = 0.0;
    report.constants = theory_constants(std::max<Eigen::Index>(n, 2), cfg.cone, cfg.ls, cfg.eps_c, 1.0, 0.0, nd, 1.0);
    finish(TerminationReason::kGapReached);
    return report;
  }

  const double eps_g_normalized = cfg.eps_g / norm.cost_scale;
  const double t_target = nd / eps_g_normalized;
  double theta_hat = 0.0;
  double t0 = kNaN;
  double span = 1.0;

  auto constants = [&] {
    return theory_constants(n, cfg.cone, cfg.ls, cfg.eps_c, eps_g_normalized, theta_hat,
                            std::isfinite(t0) && t0 > 0.0 ? t0 : nd, span);
  };

  int phase = 0;
  try {
    for (phase = 1; phase <= cfg.max_phases; ++phase) {
      PhaseTrace dec;
      dec.phase = phase;
      dec.kind = PhaseKind::kDecrease;
      dec.cost_before = frob_inner(norm.cost, x);
      const double dec_start = elapsed();
      DecreaseOptions dopt;
      dopt.cost_floor = cfg.cost_floor;
      double first_tol = 0.0;
      for (int s = 1; s <= cfg.s_d; ++s) {
        const CholFactor<double> u = cholesky(x);
        const AffineSlice slice = build_slice(norm, u, std::nullopt);
        // Only the first step of a phase needs the tolerance that keeps it below
        // hat_x; later steps stop no finer, since solving each step ever more
        // exactly drives X toward singularity.
        double gap_tol = decrease_gap_tolerance(norm, u, cfg.cone);
        if (s == 1)
          first_tol = gap_tol;
        else
          gap_tol = std::max(gap_tol, first_tol);
        const NewtonState state = decrease_solve(slice, cfg.cone, cfg.ls, gap_tol, dopt);
        x = symmetrized(extract_iterate(state, u, norm).x);
        const double cost = frob_inner(norm.cost, x);
        dec.step_costs.push_back(cost);
        dec.inner_iterations = s;
        ++report.total_inner_iterations;
        TraceRecord r;
        r.phase = phase;
        r.kind = PhaseKind::kDecrease;
        r.inner_iter = s;
        r.cost = cost;
        r.millis = elapsed();
        emit(r);
      }
      dec.cost_after = frob_inner(norm.cost, x);
      dec.millis = elapsed() - dec_start;
      if (cfg.keep_iterates) dec.x = x;
      {
        TraceRecord r;
        r.phase = phase;
        r.kind = PhaseKind::kDecrease;
        r.inner_iter = dec.inner_iterations;
        r.cost = dec.cost_after;
        r.millis = elapsed();
        r.boundary = true;
        emit(r);
      }
      report.phases.push_back(dec);

      PhaseTrace cen;
      cen.phase = phase;
      cen.kind = PhaseKind::kCentering;
      cen.cost_before = frob_inner(norm.cost, x);
      const double cen_start = elapsed();
      const double logdet_entry = log_det(cholesky(x));
      int inner = 0;
      auto on_iteration = [&](int, const Mat& xl, double cost, double lambda0, const PsdDual& dual,
                              double surrogate) {
        ++inner;
        ++report.total_inner_iterations;
        TraceRecord r;
        r.phase = phase;
        r.kind = PhaseKind::kCentering;
        r.inner_iter = inner;
        r.cost = cost;
        r.lambda0 = lambda0;
        r.tau = dual.tau;
        if (std::isfinite(surrogate)) {
          const TBounds b = t_bounds(dual.tau, surrogate, xl, cfg.ls);
          r.t_lo = b.t_lo;
          r.t_hi = b.t_hi;
          if (b.t_lo > 0.0) r.gap = norm.cost_scale * nd / b.t_lo;
        }
        r.millis = elapsed();
        emit(r);
      };
      double eps = cfg.eps_c;
      int budget = cfg.max_centering_iters;
      if (budget == 0) {
        const long l_hat = theory_constants(n, cfg.cone, cfg.ls, cfg.eps_c_floor, eps_g_normalized, theta_hat,
                                            std::isfinite(t0) && t0 > 0.0 ? t0 : nd, span)
                               .L_hat;
        budget = static_cast<int>(std::clamp<long>(l_hat, 1, std::numeric_limits<int>::max()));
      }
      CenteringResult res = centering_phase(norm, x, cfg.cone, cfg.ls, eps, budget, on_iteration);
      auto absorb = [&](const CenteringResult& c) {
        cen.logdet.insert(cen.logdet.end(), c.logdet.begin(), c.logdet.end());
        cen.lambda0.insert(cen.lambda0.end(), c.lambda0_history.begin(), c.lambda0_history.end());
        cen.step_costs.insert(cen.step_costs.end(), c.costs.begin(), c.costs.end());
      };
      absorb(res);
      TBounds tb = t_bounds(res.tau, res.surrogate, res.x, cfg.ls);
      // The dual already points past the target: tighten centering until the
      // lower bound certifies it as well.
      while (-res.tau > t_target && tb.t_lo < t_target && eps > cfg.eps_c_floor && inner < budget) {
        eps = std::max(eps * 1e-2, cfg.eps_c_floor);
        // The surrogate can already be below the tighter target.
        if (res.surrogate <= eps) continue;
        res = centering_phase(norm, res.x, cfg.cone, cfg.ls, eps, budget - inner + 1, on_iteration);
        // The first check repeats the previous exit point.
        cen.logdet.pop_back();
        cen.lambda0.pop_back();
        cen.step_costs.pop_back();
        --inner;
        --report.total_inner_iterations;
        absorb(res);
        tb = t_bounds(res.tau, res.surrogate, res.x, cfg.ls);
      }
      x = res.x;
      cen.inner_iterations = inner;
      cen.cost_after = frob_inner(norm.cost, x);
      cen.tau = res.tau;
      cen.t_lo = tb.t_lo;
      cen.t_hi = tb.t_hi;
      cen.surrogate = res.surrogate;
      cen.eps_c_used = eps;
      if (tb.t_lo > 0.0) {
        report.normalized_gap = certified_gap(tb.t_lo, n);
        report.certified_gap = norm.cost_scale * report.normalized_gap;
        cen.gap = report.certified_gap;
      } else {
        report.normalized_gap = std::numeric_limits<double>::infinity();
        report.certified_gap = std::numeric_limits<double>::infinity();
      }
      if (res.tau < 0.0) {
        theta_hat = std::max(theta_hat, (res.beta / res.tau).squaredNorm());
        if (!std::isfinite(t0)) t0 = -res.tau;
      }
      span = std::max(span, (nd - 1.0) * (cen.logdet.back() - logdet_entry) + cfg.eps_c);
      cen.millis = elapsed() - cen_start;
      if (cfg.keep_iterates) cen.x = x;
      {
        TraceRecord r;
        r.phase = phase;
        r.kind = PhaseKind::kCentering;
        r.inner_iter = inner;
        r.cost = cen.cost_after;
        r.lambda0 = res.lambda0;
        r.tau = res.tau;
        r.t_lo = tb.t_lo;
        r.t_hi = tb.t_hi;
        r.gap = cen.gap;
        r.millis = elapsed();
        r.boundary = true;
        emit(r);
      }
      report.phases.push_back(cen);
      if (tb.t_lo > 0.0 && report.certified_gap <= cfg.eps_g) {
        report.constants = constants();
        finish(TerminationReason::kGapReached);
        return report;
      }
    }
  } catch (const Unbounded& e) {
    report.message = "phase " + std::to_string(phase) + ": " + e.what();
    report.constants = constants();
    finish(TerminationReason::kUnbounded);
    return report;
  } catch (const CenteringBudgetExceeded& e) {
    report.message = "phase " + std::to_string(phase) + ": " + e.what();
    report.budget_exhausted = true;
    report.constants = constants();
    finish(TerminationReason::kSubproblemFailure);
    return report;
  } catch (const Error& e) {
    report.message = "phase " + std::to_string(phase) + ": " + e.what();
    report.constants = constants();
    finish(TerminationReason::kSubproblemFailure);
    return report;
  }
  report.constants = constants();
  finish(TerminationReason::kMaxPhases);
  return report;
}

}  // namespace ddsdp
