#include "ddsdp/inner_solvers.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <cmath>
#include <limits>
#include <string>

namespace ddsdp {

AffineSlice build_slice(const NormalizedSdp& norm, const CholFactor<double>& u,
                        std::optional<double> cost_level) {
  const Eigen::Index n = norm.n;
  if (u.order() != n) throw DimensionMismatch("build_slice: factor order differs from problem order");
  AffineSlice slice;
  slice.n = n;
  slice.has_cost_row = cost_level.has_value();
  const Eigen::Index rows = norm.m + (slice.has_cost_row ? 1 : 0);
  const Eigen::Index vars = 3 * pair_count(n);
  slice.jacobian.resize(rows, vars);
  slice.rhs.resize(rows);
  slice.constraints.reserve(static_cast<std::size_t>(norm.m));
  for (Eigen::Index i = 0; i < norm.m; ++i) {
    Mat a = congruence(norm.constraints[static_cast<std::size_t>(i)], u, Direction::kForward);
    slice.jacobian.row(i) = psi_adjoint(a).transpose();
    slice.rhs(i) = a.trace();
    slice.constraints.push_back(std::move(a));
  }
  slice.cost = congruence(norm.cost, u, Direction::kForward);
  slice.cost_coords = psi_adjoint(slice.cost);
  if (slice.has_cost_row) {
    slice.jacobian.row(rows - 1) = slice.cost_coords.transpose();
    slice.rhs(rows - 1) = slice.cost.trace();
  }
  return slice;
}

void LineSearchConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 0.5)) throw Error("line search alpha must lie in (0, 0.5)");
  if (!(beta > 0.0 && beta < 1.0)) throw Error("line search beta must lie in (0, 1)");
  if (max_backtracks < 1) throw Error("line search needs at least one backtrack");
}

KktSolution newton_kkt_solve(const BlockHessian<double>& hess, const Mat& jacobian, const Vec& gradient) {
  const Eigen::Index vars = gradient.size();
  const Eigen::Index blocks = vars / 3;
  if (static_cast<Eigen::Index>(hess.size()) != blocks || vars % 3 != 0)
    throw DimensionMismatch("newton_kkt_solve: Hessian blocks do not match the gradient");
  if (jacobian.rows() > 0 && jacobian.cols() != vars)
    throw DimensionMismatch("newton_kkt_solve: Jacobian width does not match the gradient");

  std::vector<Eigen::Matrix3d> inv(static_cast<std::size_t>(blocks));
  Vec hinv_g(vars);
  for (Eigen::Index k = 0; k < blocks; ++k) {
    Eigen::LLT<Eigen::Matrix3d> llt(hess[static_cast<std::size_t>(k)]);
    if (llt.info() != Eigen::Success) throw SingularKkt("Hessian block " + std::to_string(k) + " is not positive definite");
    inv[static_cast<std::size_t>(k)] = llt.solve(Eigen::Matrix3d::Identity());
    hinv_g.segment<3>(3 * k) = inv[static_cast<std::size_t>(k)] * gradient.segment<3>(3 * k);
  }

  KktSolution out;
  const Eigen::Index rows = jacobian.rows();
  if (rows == 0) {
    out.step = -hinv_g;
    out.duals = Vec(0);
    return out;
  }

  // Null-space condition J·d = 0 through an orthonormal basis Q of the row
  // space: near an optimum the cost row is nearly a combination of the
  // constraint rows, and a Schur complement on the raw rows loses the step.
  Eigen::ColPivHouseholderQR<Mat> qr(jacobian.transpose());
  qr.setThreshold(1e-13);
  if (qr.rank() < rows) throw SingularKkt("slice rows are numerically dependent");
  const Mat q = qr.householderQ() * Mat::Identity(vars, rows);
  Mat hinv_q(vars, rows);
  for (Eigen::Index k = 0; k < blocks; ++k)
    hinv_q.middleRows<3>(3 * k).noalias() = inv[static_cast<std::size_t>(k)] * q.middleRows<3>(3 * k);
  Mat schur(rows, rows);
  schur.noalias() = q.transpose() * hinv_q;
  schur = symmetrized(schur);
  Eigen::LLT<Mat> llt(schur);
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-15)
    throw SingularKkt("Schur complement is numerically singular");
  Vec z = llt.solve(-(q.transpose() * hinv_g));
  out.step = -hinv_g - hinv_q * z;
  // Iterative refinement against the full KKT residual; blocks near the cone
  // boundary make H badly conditioned.
  auto apply_hinv = [&](const Vec& v) {
    Vec w(vars);
    for (Eigen::Index k = 0; k < blocks; ++k)
      w.segment<3>(3 * k) = inv[static_cast<std::size_t>(k)] * v.segment<3>(3 * k);
    return w;
  };
  for (int pass = 0; pass < 2; ++pass) {
    Vec r1(vars);
    for (Eigen::Index k = 0; k < blocks; ++k)
      r1.segment<3>(3 * k) = hess[static_cast<std::size_t>(k)] * out.step.segment<3>(3 * k);
    r1 += q * z + gradient;
    const Vec r2 = q.transpose() * out.step;
    const Vec hinv_r1 = apply_hinv(r1);
    const Vec dz = llt.solve(r2 - q.transpose() * hinv_r1);
    out.step -= hinv_r1 + hinv_q * dz;
    z += dz;
  }
  // Jᵀ = Q R Pᵀ, so Jᵀy = Qz gives y = P R⁻¹ z.
  const Vec r_inv_z = qr.matrixR().topLeftCorner(rows, rows).template triangularView<Eigen::Upper>().solve(z);
  out.duals = qr.colsPermutation() * r_inv_z;
  if (!out.step.allFinite() || !out.duals.allFinite()) throw SingularKkt("non-finite Newton step");
  return out;
}

namespace {

// Minimizes lᵀm − φ(m) over the slice from `state.blocks` by damped Newton.
constexpr double kStallStep = 1e-12;

void newton_minimize(const AffineSlice& slice, ConeKind kind, const LineSearchConfig& ls, const Vec& linear,
                     double tol, int max_iterations, std::optional<double> cost_floor, NewtonState& state) {
  auto& m = state.blocks.coords();
  auto value = [&](const BlockSet<double>& b) { return linear.dot(b.coords()) - phi(b, kind); };
  double f = value(state.blocks);
  double previous_lambda = std::numeric_limits<double>::infinity();
  for (int it = 0;; ++it) {
    state.gradient = linear - phi_gradient(state.blocks, kind);
    BlockHessian<double> hess = phi_hessian(state.blocks, kind);
    for (auto& h : hess) h = -h;
    KktSolution kkt = newton_kkt_solve(hess, slice.jacobian, state.gradient);
    double lambda2 = 0.0;
    for (Eigen::Index k = 0; k < state.blocks.block_count(); ++k) {
      const auto d = kkt.step.segment<3>(3 * k);
      lambda2 += d.dot(hess[static_cast<std::size_t>(k)] * d);
    }
    const double lambda = std::sqrt(std::max(lambda2, 0.0));
    state.step = kkt.step;
    state.duals = kkt.duals;
    state.decrement = lambda;
    state.objective = f;
    state.decrement_history.push_back(lambda);
    state.objective_history.push_back(f);
    if (state.decrement_history.size() == 1) state.initial_decrement = lambda;
    if (lambda <= tol) break;
    // Roundoff floor: a decrement that stops shrinking inside the quadratic region.
    if (lambda < 1e-3 && lambda > 0.5 * previous_lambda) break;
    previous_lambda = lambda;
    if (it >= max_iterations) throw MaxIterations("Newton did not reach the decrement tolerance");

    const double slope = state.gradient.dot(kkt.step);
    double s = 1.0;
    BlockSet<double> trial = state.blocks;
    int backtracks = 0;
    for (;;) {
      trial.coords() = m + s * kkt.step;
      if (is_interior(trial, kind)) break;
      s *= ls.beta;
      if (++backtracks > ls.max_backtracks) throw BoundaryReached(-1);
    }
    if (s < kStallStep) throw MaxIterations("Newton step blocked at the interiority tolerance");
    double f_trial = value(trial);
    // Roundoff floor: near convergence f changes below machine resolution.
    const double slack = 1e-13 * (1.0 + std::abs(f));
    while (!(f_trial <= f + ls.alpha * s * slope + slack)) {
      s *= ls.beta;
      if (++backtracks > ls.max_backtracks) throw MaxIterations("line search failed to find sufficient decrease");
      trial.coords() = m + s * kkt.step;
      f_trial = value(trial);
    }
    m = trial.coords();
    f = f_trial;
    ++state.iterations;
    if (cost_floor && slice.cost_coords.dot(m) < *cost_floor)
      throw Unbounded("subproblem cost fell below the configured floor");
  }
  state.cost = slice.cost_coords.dot(m);
}

}  // namespace

NewtonState centering_solve(const AffineSlice& slice, ConeKind kind, const LineSearchConfig& ls,
                            const CenteringOptions& options) {
  ls.validate();
  NewtonState state(slice.n);
  state.blocks = identity_blocks(slice.n);
  const Vec zero = Vec::Zero(state.blocks.coords().size());
  newton_minimize(slice, kind, ls, zero, options.tol_lambda, options.max_iterations, std::nullopt, state);
  if (slice.has_cost_row) state.tau = -state.duals(slice.rows() - 1) / static_cast<double>(slice.n - 1);
  return state;
}

double centering_decrement(const AffineSlice& slice, ConeKind kind) {
  const BlockSet<double> m0 = identity_blocks(slice.n);
  const Vec gradient = -phi_gradient(m0, kind);
  BlockHessian<double> hess = phi_hessian(m0, kind);
  for (auto& h : hess) h = -h;
  const KktSolution kkt = newton_kkt_solve(hess, slice.jacobian, gradient);
  double lambda2 = 0.0;
  for (Eigen::Index k = 0; k < m0.block_count(); ++k) {
    const auto d = kkt.step.segment<3>(3 * k);
    lambda2 += d.dot(hess[static_cast<std::size_t>(k)] * d);
  }
  return std::sqrt(std::max(lambda2, 0.0));
}

NewtonState decrease_solve(const AffineSlice& slice, ConeKind kind, const LineSearchConfig& ls, double gap_tol,
                           const DecreaseOptions& options) {
  ls.validate();
  if (!(gap_tol > 0.0)) throw Error("decrease_solve: gap tolerance must be positive");
  NewtonState state(slice.n);
  state.blocks = identity_blocks(slice.n);
  if (slice.cost_coords.lpNorm<Eigen::Infinity>() == 0.0) {
    state.objective = -phi(state.blocks, kind);
    state.cost = 0.0;
    return state;
  }
  const double barrier_params = 2.0 * static_cast<double>(pair_count(slice.n));
  double mu = barrier_params / std::max(std::abs(slice.cost.trace()), 1.0);
  std::optional<NewtonState> completed;
  for (;;) {
    const Vec linear = mu * slice.cost_coords;
    try {
      newton_minimize(slice, kind, ls, linear, options.newton_tol, options.max_newton_per_stage,
                      options.cost_floor, state);
    } catch (const MaxIterations&) {
      if (!completed) throw;
      return *completed;
    }
    state.barrier_gap = barrier_params / mu;
    if (state.barrier_gap <= gap_tol) break;
    completed = state;
    mu *= options.mu_factor;
  }
  return state;
}

Iterate extract_iterate(const NewtonState& state, const CholFactor<double>& u, const NormalizedSdp& norm) {
  Iterate out;
  out.x = lift(psi_assemble(state.blocks), u);
  out.cost = frob_inner(norm.cost, out.x);
  return out;
}

}  // namespace ddsdp
