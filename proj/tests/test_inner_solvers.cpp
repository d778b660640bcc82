#include <doctest.h>

#include <Eigen/QR>

#include "ddsdp/inner_solvers.hpp"
#include "ddsdp/oracle.hpp"
#include "support.hpp"

using namespace ddsdp;
using testing_support::random_pd;

namespace {

NormalizedSdp min_eigenvalue_instance() {
  NormalizedSdp norm;
  norm.n = 2;
  norm.m = 0;
  norm.cost = Mat::Zero(2, 2);
  norm.cost(0, 0) = 1.0 / std::sqrt(2.0);
  norm.cost(1, 1) = -1.0 / std::sqrt(2.0);
  norm.rhs = Vec(0);
  norm.transform = Mat(0, 0);
  return norm;
}

double row_residual(const AffineSlice& slice, const BlockSet<double>& b) {
  return (slice.jacobian * b.coords() - slice.rhs).lpNorm<Eigen::Infinity>();
}

// Decrement of −log det over {Tr(Ã_i Y), Tr(C̃ Y) fixed} at Y = I: the norm of
// the part of I orthogonal to the slice data.
double logdet_decrement_at_identity(const AffineSlice& slice) {
  const Eigen::Index n = slice.n;
  Mat basis(n * (n + 1) / 2, static_cast<Eigen::Index>(slice.constraints.size()) + 1);
  for (std::size_t i = 0; i < slice.constraints.size(); ++i) basis.col(static_cast<Eigen::Index>(i)) = svec(slice.constraints[i]);
  basis.col(basis.cols() - 1) = svec(slice.cost);
  const Vec e = svec(Mat::Identity(n, n));
  const Vec fit = basis * basis.colPivHouseholderQr().solve(e);
  return (e - fit).norm();
}

}  // namespace

TEST_CASE("build_slice with the identity factor keeps the data") {
  const NormalizedSdp norm = normalize(random_sdp(4, 3, 1));
  const auto u = cholesky(Mat::Identity(4, 4));
  const AffineSlice slice = build_slice(norm, u, std::nullopt);
  CHECK(slice.rows() == 3);
  CHECK_FALSE(slice.has_cost_row);
  for (Eigen::Index i = 0; i < 3; ++i)
    CHECK((slice.constraints[static_cast<std::size_t>(i)] - norm.constraints[static_cast<std::size_t>(i)]).norm() < 1e-15);
  CHECK((slice.cost - norm.cost).norm() < 1e-15);
}

TEST_CASE("identity blocks are feasible for every slice") {
  std::mt19937_64 rng(31);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const NormalizedSdp norm = normalize(random_sdp(5, 4, seed));
    const Mat x = random_pd(5, rng);
    const auto u = cholesky(x);
    const double level = frob_inner(norm.cost, x);
    const AffineSlice slice = build_slice(norm, u, level);
    CHECK(slice.rows() == 5);
    CHECK(row_residual(slice, identity_blocks(5)) <= 1e-12 * std::max(1.0, slice.rhs.lpNorm<Eigen::Infinity>()));
    CHECK(slice.rhs(4) == doctest::Approx(level).epsilon(1e-12));
  }
}

TEST_CASE("KKT solve matches a dense factorization") {
  std::mt19937_64 rng(32);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 10; ++trial) {
    BlockHessian<double> hess(2);
    for (auto& h : hess) {
      Eigen::Matrix3d b;
      for (int i = 0; i < 9; ++i) b(i) = normal(rng);
      h = b * b.transpose() + Eigen::Matrix3d::Identity();
    }
    Mat j(2, 6);
    for (Eigen::Index i = 0; i < j.size(); ++i) j(i) = normal(rng);
    Vec g(6);
    for (Eigen::Index i = 0; i < 6; ++i) g(i) = normal(rng);

    Mat kkt = Mat::Zero(8, 8);
    kkt.block<3, 3>(0, 0) = hess[0];
    kkt.block<3, 3>(3, 3) = hess[1];
    kkt.block(0, 6, 6, 2) = j.transpose();
    kkt.block(6, 0, 2, 6) = j;
    Vec rhs = Vec::Zero(8);
    rhs.head(6) = -g;
    const Vec dense = kkt.fullPivLu().solve(rhs);

    const KktSolution sol = newton_kkt_solve(hess, j, g);
    CHECK((sol.step - dense.head(6)).norm() <= 1e-10 * std::max(1.0, dense.head(6).norm()));
    CHECK((sol.duals - dense.tail(2)).norm() <= 1e-10 * std::max(1.0, dense.tail(2).norm()));
  }
}

TEST_CASE("KKT solve trivial cases") {
  BlockHessian<double> hess(1, 2.0 * Eigen::Matrix3d::Identity());
  const KktSolution zero = newton_kkt_solve(hess, Mat::Ones(1, 3), Vec::Zero(3));
  CHECK(zero.step.isZero());
  CHECK(zero.duals.isZero());
  Vec g(3);
  g << 1, -2, 4;
  const KktSolution free = newton_kkt_solve(hess, Mat(0, 3), g);
  CHECK((free.step + g / 2.0).norm() < 1e-15);
  CHECK(free.duals.size() == 0);
  CHECK_THROWS_AS(newton_kkt_solve(hess, Mat::Zero(1, 3), g), SingularKkt);
  Mat dependent(2, 3);
  dependent << 1, 2, 3, 2, 4, 6;
  CHECK_THROWS_AS(newton_kkt_solve(hess, dependent, g), SingularKkt);
}

TEST_CASE("centering on a fully constrained slice does not move") {
  AffineSlice slice;
  slice.n = 2;
  slice.jacobian = Mat::Identity(3, 3);
  slice.rhs = identity_blocks(2).coords();
  slice.cost = Mat::Zero(2, 2);
  slice.cost_coords = Vec::Zero(3);
  for (ConeKind kind : {ConeKind::kDD, ConeKind::kSDD}) {
    const NewtonState s = centering_solve(slice, kind, {});
    CHECK(s.decrement <= 1e-14);
    CHECK(s.iterations == 0);
    CHECK((s.blocks.coords() - slice.rhs).norm() <= 1e-14);
  }
}

TEST_CASE("centering moves from a non-stationary start") {
  AffineSlice slice;
  slice.n = 2;
  slice.jacobian = Mat(0, 3);
  slice.rhs = Vec(0);
  slice.cost = Mat::Zero(2, 2);
  slice.cost_coords = Vec::Zero(3);
  // −φ is unbounded below without constraints; Newton climbs until the step budget runs out.
  CHECK_THROWS_AS(centering_solve(slice, ConeKind::kSDD, {}, {1e-8, 20}), MaxIterations);
  slice.jacobian = Mat::Zero(1, 3);
  slice.jacobian(0, 0) = 1.0;
  slice.jacobian(0, 1) = 2.0;
  slice.rhs = Vec::Constant(1, 3.0);
  // max log(xy − z²) subject to x + 2y = 3.
  const NewtonState s = centering_solve(slice, ConeKind::kSDD, {});
  CHECK(s.decrement <= 1e-8);
  CHECK(s.iterations > 0);
  CHECK(s.blocks.coords()(0) == doctest::Approx(1.5));
  CHECK(s.blocks.coords()(1) == doctest::Approx(0.75));
  CHECK(std::abs(s.blocks.coords()(2)) < 1e-9);
}

TEST_CASE("centering iterates respect the slice and the damped-step bounds") {
  std::mt19937_64 rng(33);
  const LineSearchConfig ls;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const NormalizedSdp norm = normalize(random_sdp(4 + 2 * static_cast<Eigen::Index>(seed % 2), 3, seed));
    const Mat x = random_pd(norm.n, rng);
    const auto u = cholesky(x);
    const AffineSlice slice = build_slice(norm, u, frob_inner(norm.cost, x));
    for (ConeKind kind : {ConeKind::kDD, ConeKind::kSDD}) {
      const NewtonState s = centering_solve(slice, kind, ls, {1e-10, 200});
      CHECK(row_residual(slice, s.blocks) <= 1e-9 * std::max(1.0, slice.rhs.lpNorm<Eigen::Infinity>()));
      const auto& f = s.objective_history;
      const auto& lam = s.decrement_history;
      const double f_final = f.back();
      for (std::size_t k = 0; k + 1 < f.size(); ++k) {
        const double guaranteed = ls.alpha * ls.beta * lam[k] * lam[k] / (1.0 + lam[k]);
        CHECK(f[k + 1] <= f[k] - guaranteed + 1e-9);
        if (lam[k] <= 0.68) CHECK(f[k] - f_final <= lam[k] * lam[k] + 1e-9);
      }
      CHECK(s.initial_decrement == doctest::Approx(centering_decrement(slice, kind)).epsilon(1e-10));
    }
  }
}

TEST_CASE("block decrement dominates the log-det decrement") {
  std::mt19937_64 rng(34);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const NormalizedSdp norm = normalize(random_sdp(5, 3, seed));
    const Mat x = random_pd(5, rng);
    const AffineSlice slice = build_slice(norm, cholesky(x), frob_inner(norm.cost, x));
    const double lambda_h = logdet_decrement_at_identity(slice);
    for (ConeKind kind : {ConeKind::kDD, ConeKind::kSDD})
      CHECK(centering_decrement(slice, kind) >= lambda_h - 1e-12);
  }
}

TEST_CASE("centering near the PSD center stays within the quadratic-regime bound") {
  const LineSearchConfig ls;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const NormalizedSdp norm = normalize(random_sdp(4, 2, seed));
    const Mat eye = Mat::Identity(4, 4);
    const double level = frob_inner(norm.cost, eye);
    const auto center = oracle::analytic_center(norm, level, eye);
    const Mat x = 0.97 * center.x + 0.03 * eye;
    const auto u = cholesky(x);
    const AffineSlice slice = build_slice(norm, u, level);
    const double n1 = 3.0;
    const double logdet_center = log_det(cholesky(center.x));
    for (ConeKind kind : {ConeKind::kDD, ConeKind::kSDD}) {
      const NewtonState s = centering_solve(slice, kind, ls, {1e-10, 200});
      const Iterate next = extract_iterate(s, u, norm);
      const double lambda0 = s.initial_decrement;
      REQUIRE(lambda0 <= ls.eta() / std::sqrt(n1));
      const double gap = n1 * (logdet_center - log_det(cholesky(next.x)));
      CHECK(gap >= -1e-9);
      CHECK(gap <= (n1 - ls.alpha) * lambda0 * lambda0 + 1e-9);
    }
  }
}

TEST_CASE("cost-row dual at the PSD center matches the central-path parameter") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const NormalizedSdp norm = normalize(random_sdp(4 + static_cast<Eigen::Index>(seed % 3), 3, seed));
    const Mat eye = Mat::Identity(norm.n, norm.n);
    const auto ref = oracle::central_path_point(norm, 5.0 * static_cast<double>(norm.n), eye);
    const auto center = oracle::analytic_center(norm, ref.cost, ref.x);
    const auto u = cholesky(center.x);
    const AffineSlice slice = build_slice(norm, u, center.cost);
    for (ConeKind kind : {ConeKind::kDD, ConeKind::kSDD}) {
      const NewtonState s = centering_solve(slice, kind, {}, {1e-10, 200});
      CHECK(std::abs(std::abs(s.tau) - center.t) <= 0.02 * center.t);
      CHECK(std::abs(center.t - ref.t) <= 1e-4 * ref.t);
    }
  }
}

TEST_CASE("decrease_solve lowers the cost and keeps the slice") {
  std::mt19937_64 rng(35);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const NormalizedSdp norm = normalize(random_sdp(5, 3, seed));
    const Mat x = Mat::Identity(5, 5);
    const auto u = cholesky(x);
    const AffineSlice slice = build_slice(norm, u, std::nullopt);
    for (ConeKind kind : {ConeKind::kDD, ConeKind::kSDD}) {
      const NewtonState s = decrease_solve(slice, kind, {}, 1e-6);
      CHECK(s.cost <= slice.cost.trace() + 1e-12);
      // Blocks heading to zero can stall a late stage at the interiority tolerance.
      CHECK(s.barrier_gap <= 1e-4);
      CHECK(decrease_solve(slice, kind, {}, 1e-3).barrier_gap <= 1e-3);
      CHECK(row_residual(slice, s.blocks) <= 1e-9);
      const Iterate it = extract_iterate(s, u, norm);
      CHECK(constraint_residual(norm, it.x) <= 1e-8);
      CHECK(std::abs(it.cost - s.cost) <= 1e-9);
      CHECK(is_psd(it.x, 0.0));
    }
  }
}

TEST_CASE("decrease_solve with zero cost stays at the start") {
  NormalizedSdp norm = normalize(random_sdp(4, 2, 3));
  norm.cost.setZero();
  const auto u = cholesky(Mat::Identity(4, 4));
  const NewtonState s = decrease_solve(build_slice(norm, u, std::nullopt), ConeKind::kSDD, {}, 1e-6);
  CHECK(s.cost == 0.0);
  CHECK((s.blocks.coords() - identity_blocks(4).coords()).norm() == 0.0);
}

TEST_CASE("decrease_solve detects an unbounded DD slice") {
  const NormalizedSdp norm = min_eigenvalue_instance();
  const auto u = cholesky(Mat::Identity(2, 2));
  const AffineSlice slice = build_slice(norm, u, std::nullopt);
  CHECK_THROWS_AS(decrease_solve(slice, ConeKind::kDD, {}, 1e-8), Unbounded);
}

TEST_CASE("extract_iterate at the identity blocks returns the previous iterate") {
  std::mt19937_64 rng(36);
  const NormalizedSdp norm = normalize(random_sdp(6, 3, 2));
  const Mat x = random_pd(6, rng);
  const auto u = cholesky(x);
  NewtonState s(6);
  s.blocks = identity_blocks(6);
  const Iterate it = extract_iterate(s, u, norm);
  CHECK((it.x - x).norm() <= 1e-12 * x.norm());
  CHECK(it.cost == doctest::Approx(frob_inner(norm.cost, x)).epsilon(1e-12));
}

TEST_CASE("line search configuration ranges") {
  LineSearchConfig ls;
  CHECK(ls.eta() == doctest::Approx(0.125));
  ls.alpha = 0.5;
  CHECK_THROWS_AS(ls.validate(), Error);
  ls.alpha = 0.1;
  ls.beta = 1.0;
  CHECK_THROWS_AS(ls.validate(), Error);
}
