#include <doctest.h>

#include <Eigen/LU>

#include "ddsdp/oracle.hpp"
#include "support.hpp"

using namespace ddsdp;
using testing_support::random_pd;

namespace {

double log_det_dense(const Mat& x) { return std::log(x.determinant()); }

}  // namespace

TEST_CASE("log-det gradient against central differences") {
  std::mt19937_64 rng(51);
  for (Eigen::Index n : {2, 3, 5}) {
    const Mat x = random_pd(n, rng);
    const Vec v = svec(x);
    const Vec g = oracle::logdet_gradient(x);
    Vec fd(v.size());
    const double h = 1e-6;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      Vec p = v, m = v;
      p(k) += h;
      m(k) -= h;
      fd(k) = (log_det_dense(smat(p, n)) - log_det_dense(smat(m, n))) / (2 * h);
    }
    CHECK((fd - g).norm() <= 1e-6 * g.norm());
  }
}

TEST_CASE("log-det Hessian is the quadratic form Tr(X⁻¹UX⁻¹V)") {
  std::mt19937_64 rng(52);
  for (Eigen::Index n : {2, 4}) {
    const Mat x = random_pd(n, rng);
    const Mat w = x.inverse();
    const Mat h = oracle::logdet_hessian(x);
    for (int trial = 0; trial < 5; ++trial) {
      const Mat u = testing_support::random_symmetric(n, rng);
      const Mat v = testing_support::random_symmetric(n, rng);
      const double form = svec(u).dot(h * svec(v));
      CHECK(form == doctest::Approx((w * u * w * v).trace()).epsilon(1e-10));
    }
    // Differenced gradients: ∇(−log det) changes by −H dv.
    const Vec base = svec(x);
    const double step = 1e-6;
    for (Eigen::Index k = 0; k < base.size(); ++k) {
      Vec p = base, m = base;
      p(k) += step;
      m(k) -= step;
      const Vec col = -(oracle::logdet_gradient(smat(p, n)) - oracle::logdet_gradient(smat(m, n))) / (2 * step);
      CHECK((col - h.col(k)).norm() <= 1e-5 * std::max(1.0, h.col(k).norm()));
    }
  }
}

TEST_CASE("central path on a diagonal instance matches scalar bisection") {
  const Eigen::Index n = 3;
  RawSdp raw;
  raw.n = n;
  raw.m = 1;
  raw.constraints = {Mat::Identity(n, n)};
  raw.rhs = Vec::Constant(1, 1.0);
  raw.cost = Mat::Zero(n, n);
  raw.cost.diagonal() << 3.0, -1.0, 0.5;
  const NormalizedSdp norm = normalize(raw);
  const Vec c = norm.cost.diagonal();
  for (double t : {1.0, 10.0, 100.0}) {
    const auto pt = oracle::central_path_point(norm, t, Mat::Identity(n, n) / 3.0);
    // Σ 1/(t(c_i − ν)) = 1 with ν < min c.
    auto total = [&](double nu) { return (1.0 / (t * (c.array() - nu))).sum(); };
    double lo = c.minCoeff() - 1e6, hi = c.minCoeff();
    for (int k = 0; k < 200; ++k) {
      const double mid = 0.5 * (lo + hi);
      (total(mid) > 1.0 ? hi : lo) = mid;
    }
    const double nu = 0.5 * (lo + hi);
    const Vec expected = 1.0 / (t * (c.array() - nu));
    CHECK((pt.x.diagonal() - expected).norm() <= 1e-8);
    CHECK((pt.x - Mat(pt.x.diagonal().asDiagonal())).norm() <= 1e-10);
  }
}

TEST_CASE("reference_solve on the minimum-eigenvalue instance") {
  RawSdp raw;
  raw.n = 2;
  raw.m = 1;
  raw.constraints = {Mat::Identity(2, 2)};
  raw.rhs = Vec::Constant(1, 1.0);
  raw.cost = Mat::Zero(2, 2);
  raw.cost(0, 0) = 1.0;
  const NormalizedSdp norm = normalize(raw);
  const auto ref = oracle::reference_solve(norm, 1e-8, Mat::Identity(2, 2) / 2.0);
  // The path stops at gap n/t ≤ eps.
  CHECK(ref.objective + 1.0 / std::sqrt(2.0) >= -1e-12);
  CHECK(ref.objective + 1.0 / std::sqrt(2.0) <= 1e-8);
  CHECK(std::abs(recover_objective(norm, ref.x)) <= 1e-8);
}

TEST_CASE("reference_solve with a zero cost") {
  RawSdp raw = random_sdp(4, 2, 1);
  raw.cost = 2.0 * raw.constraints[1];
  const NormalizedSdp norm = normalize(raw);
  REQUIRE(norm.degenerate());
  CHECK(oracle::reference_solve(norm, 1e-6, Mat::Identity(4, 4)).objective == 0.0);
}

TEST_CASE("central path properties on random instances") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Eigen::Index n = 4 + static_cast<Eigen::Index>(seed);
    const NormalizedSdp norm = normalize(random_sdp(n, 3, seed));
    const Mat eye = Mat::Identity(n, n);
    const double nd = static_cast<double>(n);
    const auto opt = oracle::reference_solve(norm, 1e-9, eye);

    double previous_cost = std::numeric_limits<double>::infinity();
    double previous_dual = -std::numeric_limits<double>::infinity();
    Mat start = eye;
    const double t0 = nd;
    double cost0 = 0.0;
    for (double t = t0; t <= 1e6 * t0; t *= 10.0) {
      const auto pt = oracle::central_path_point(norm, t, start);
      start = pt.x;
      CHECK(pt.decrement <= 1e-9 + 1e-15 * t);
      CHECK(constraint_residual(norm, pt.x) <= 1e-10);
      // Duality bound.
      CHECK(pt.cost - opt.objective >= -1e-8);
      CHECK(pt.cost - opt.objective <= nd / t + 1e-6);
      // Monotonicity of the cost and of the dual objective.
      CHECK(pt.cost < previous_cost);
      const double dual = norm.rhs.dot(pt.duals);
      CHECK(dual > previous_dual);
      previous_cost = pt.cost;
      previous_dual = dual;
      if (t == t0) cost0 = pt.cost;
      CHECK(pt.cost >= cost0 - nd / t0 + nd / t - 1e-9);
      // KKT residual and the dual-norm identity.
      Mat s = norm.cost;
      for (Eigen::Index i = 0; i < norm.m; ++i) s -= pt.duals(i) * norm.constraints[static_cast<std::size_t>(i)];
      const Mat inv = pt.x.inverse();
      CHECK((inv - t * s).norm() <= 1e-7 * t);
      CHECK(inv.squaredNorm() == doctest::Approx(t * t * (1.0 + pt.duals.squaredNorm())).epsilon(1e-6));
    }
  }
}

TEST_CASE("analytic center and central path agree") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const NormalizedSdp norm = normalize(random_sdp(5, 3, seed));
    const Mat eye = Mat::Identity(5, 5);
    const auto path = oracle::central_path_point(norm, 30.0, eye);
    const auto center = oracle::analytic_center(norm, path.cost, path.x);
    CHECK(std::abs(center.t - 30.0) <= 1e-6 * 30.0);
    const auto back = oracle::central_path_point(norm, std::abs(center.tau), eye);
    CHECK((back.x - center.x).norm() <= 1e-6);

    // The unconstrained center has an inactive cost row.
    const auto free_center = oracle::central_path_point(norm, 1e-10, eye);
    const auto same = oracle::analytic_center(norm, free_center.cost, free_center.x);
    CHECK(std::abs(same.tau) <= 1e-6);
  }
}

TEST_CASE("oracle input checks") {
  const NormalizedSdp norm = normalize(random_sdp(4, 2, 1));
  CHECK_THROWS_AS(oracle::central_path_point(norm, 1.0, 2.0 * Mat::Identity(4, 4)), InfeasibleStart);
  CHECK_THROWS_AS(oracle::central_path_point(norm, -1.0, Mat::Identity(4, 4)), Error);
  const NormalizedSdp big = normalize(random_sdp(31, 2, 1));
  CHECK_THROWS_AS(oracle::central_path_point(big, 1.0, Mat::Identity(31, 31)), DimensionMismatch);
}
