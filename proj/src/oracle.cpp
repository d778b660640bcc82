#include "ddsdp/oracle.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <cmath>
#include <limits>

namespace ddsdp::oracle {

namespace {

void check_order(Eigen::Index n) {
  if (n > kMaxOrder) throw DimensionMismatch("oracle supports N <= 30");
}

// (row, col) of every svec coordinate.
std::vector<std::pair<Eigen::Index, Eigen::Index>> svec_index(Eigen::Index n) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> idx;
  idx.reserve(static_cast<std::size_t>(n * (n + 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) idx.emplace_back(i, j);
  return idx;
}

struct Problem {
  Vec linear;  // svec of the linear objective term
  Mat rows;    // one svec row per equality
  Vec rhs;
};

// Damped Newton on ⟨L, X⟩ − log det X from a strictly feasible start. Each
// step is computed in the basis of the current iterate X = GGᵀ, where the
// log-det Hessian is the identity and the KKT system reduces to a least-squares
// projection; the original coordinates lose accuracy like t² near the optimum.
OraclePoint minimize(const Problem& p, Eigen::Index n, const Mat& x_start, const OracleOptions& opt) {
  OraclePoint out;
  const double residual = p.rows.rows() ? (p.rows * svec(x_start) - p.rhs).lpNorm<Eigen::Infinity>() : 0.0;
  if (residual > 1e-7 * std::max(1.0, p.rhs.lpNorm<Eigen::Infinity>()))
    throw InfeasibleStart("oracle start violates the constraints");
  Eigen::LLT<Mat> start(x_start);
  if (start.info() != Eigen::Success) throw InfeasibleStart("oracle start is not positive definite");

  const Mat linear = smat(p.linear, n);
  std::vector<Mat> rows;
  for (Eigen::Index i = 0; i < p.rows.rows(); ++i) rows.push_back(smat(p.rows.row(i).transpose(), n));
  const Eigen::Index dim = n * (n + 1) / 2;
  const Vec eye = svec(Mat::Identity(n, n));

  Mat x = x_start;
  auto value = [&](const Mat& candidate, double& f) {
    Eigen::LLT<Mat> llt(candidate);
    if (llt.info() != Eigen::Success) return false;
    const double logdet = 2.0 * Mat(llt.matrixL()).diagonal().array().log().sum();
    if (!std::isfinite(logdet)) return false;
    f = frob_inner(linear, candidate) - logdet;
    return true;
  };
  double f = 0.0;
  value(x, f);
  double previous_lambda = std::numeric_limits<double>::infinity();
  for (int it = 0;; ++it) {
    Eigen::LLT<Mat> llt(x);
    if (llt.info() != Eigen::Success) throw NotConverged("oracle iterate lost definiteness");
    const Mat g = llt.matrixL();
    // Scaled data Gᵀ M G; Newton step Δ = (I − Gᵀ L G) − Σν_i GᵀA_iG with Δ ⟂ GᵀA_iG.
    const Vec rhs = eye - svec(g.transpose() * linear * g);
    Vec nu(static_cast<Eigen::Index>(rows.size()));
    Vec delta = rhs;
    if (!rows.empty()) {
      Mat basis(dim, nu.size());
      for (Eigen::Index i = 0; i < nu.size(); ++i)
        basis.col(i) = svec(g.transpose() * rows[static_cast<std::size_t>(i)] * g);
      Eigen::ColPivHouseholderQR<Mat> qr(basis);
      nu = qr.solve(rhs);
      delta = rhs - basis * nu;
      // ν grows like t; one refinement keeps Δ orthogonal to the rows at the scale of Δ.
      const Vec refine = qr.solve(delta);
      nu += refine;
      delta -= basis * refine;
    }
    const double lambda = delta.norm();
    out.decrement = lambda;
    out.duals = nu;
    out.iterations = it;
    if (lambda <= opt.tol) break;
    // A decrement that stops shrinking inside the quadratic region has hit roundoff.
    if (lambda < 1e-3 && lambda > 0.5 * previous_lambda) break;
    previous_lambda = lambda;
    if (it >= opt.max_iterations) throw NotConverged("oracle Newton exceeded its iteration budget");

    const Mat dx = symmetrized(g * smat(delta, n) * g.transpose());
    const double slope = -lambda * lambda;
    double s = 1.0;
    double f_trial = 0.0;
    int backtracks = 0;
    const double slack = 1e-13 * (1.0 + std::abs(f));
    bool stalled = false;
    while (!value(x + s * dx, f_trial) || !(f_trial <= f + opt.alpha * s * slope + slack)) {
      s *= opt.beta;
      if (++backtracks > 100) {
        if (lambda >= 1e-3) throw NotConverged("oracle line search stalled");
        stalled = true;
        break;
      }
    }
    if (stalled) break;
    x = symmetrized(Mat(x + s * dx));
    f = f_trial;
  }
  out.x = x;
  return out;
}

}  // namespace

Vec logdet_gradient(const Mat& x) {
  Eigen::LLT<Mat> llt(x);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite(0);
  return svec(llt.solve(Mat::Identity(x.rows(), x.cols())));
}

Mat logdet_hessian(const Mat& x) {
  const Eigen::Index n = x.rows();
  Eigen::LLT<Mat> llt(x);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite(0);
  const Mat w = llt.solve(Mat::Identity(n, n));
  const auto idx = svec_index(n);
  const Eigen::Index dim = static_cast<Eigen::Index>(idx.size());
  // E_ij = c_ij (e_ieⱼᵀ + eⱼeᵢᵀ), c = 1/2 on the diagonal and 1/√2 off it;
  // Tr(W E_ij W E_kl) = 2 c_ij c_kl (W_jk W_li + W_jl W_ki).
  Mat h(dim, dim);
  const double r2 = 1.0 / std::sqrt(2.0);
  for (Eigen::Index a = 0; a < dim; ++a) {
    const auto [i, j] = idx[static_cast<std::size_t>(a)];
    const double ca = i == j ? 0.5 : r2;
    for (Eigen::Index b = a; b < dim; ++b) {
      const auto [k, l] = idx[static_cast<std::size_t>(b)];
      const double cb = k == l ? 0.5 : r2;
      h(a, b) = h(b, a) = 2.0 * ca * cb * (w(j, k) * w(l, i) + w(j, l) * w(k, i));
    }
  }
  return h;
}

OraclePoint central_path_point(const NormalizedSdp& norm, double t, const Mat& x_start,
                               const OracleOptions& options) {
  check_order(norm.n);
  if (!(t > 0.0)) throw Error("central_path_point: t must be positive");
  Problem p;
  p.linear = t * svec(norm.cost);
  p.rows.resize(norm.m, norm.n * (norm.n + 1) / 2);
  for (Eigen::Index i = 0; i < norm.m; ++i) p.rows.row(i) = svec(norm.constraints[static_cast<std::size_t>(i)]);
  p.rhs = norm.rhs;
  OraclePoint out = minimize(p, norm.n, x_start, options);
  out.t = t;
  out.duals = -out.duals / t;
  out.cost = frob_inner(norm.cost, out.x);
  return out;
}

OraclePoint analytic_center(const NormalizedSdp& norm, double cost_level, const Mat& x_start,
                            const OracleOptions& options) {
  check_order(norm.n);
  const Eigen::Index dim = norm.n * (norm.n + 1) / 2;
  Problem p;
  p.linear = Vec::Zero(dim);
  p.rows.resize(norm.m + 1, dim);
  p.rhs.resize(norm.m + 1);
  for (Eigen::Index i = 0; i < norm.m; ++i) p.rows.row(i) = svec(norm.constraints[static_cast<std::size_t>(i)]);
  p.rows.row(norm.m) = svec(norm.cost);
  p.rhs << norm.rhs, cost_level;
  OraclePoint out = minimize(p, norm.n, x_start, options);
  // X⁻¹ = Σν_iA_i + ν_c C at the optimum.
  out.tau = -out.duals(norm.m);
  out.t = -out.tau;
  out.duals = -out.duals.head(norm.m);
  out.cost = frob_inner(norm.cost, out.x);
  return out;
}

ReferenceResult reference_solve(const NormalizedSdp& norm, double eps, const Mat& x0, const OracleOptions& options) {
  check_order(norm.n);
  const double n = static_cast<double>(norm.n);
  ReferenceResult out;
  out.x = x0;
  double t = n;
  if (norm.degenerate()) {
    const OraclePoint p = central_path_point(norm, t, x0, options);
    out.x = p.x;
    out.t = t;
    out.objective = 0.0;
    return out;
  }
  for (;;) {
    const OraclePoint p = central_path_point(norm, t, out.x, options);
    out.x = p.x;
    out.t = t;
    out.objective = p.cost;
    if (n / t <= eps) break;
    t *= 10.0;
  }
  return out;
}

}  // namespace ddsdp::oracle
