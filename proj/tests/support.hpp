#pragma once

// Shared generators and numeric helpers for the unit and acceptance suites.

#include <cmath>
#include <random>

#include "ddsdp/cones.hpp"
#include "ddsdp/symmat.hpp"

namespace testing_support {

using ddsdp::Mat;
using ddsdp::Vec;

inline Mat random_symmetric(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Mat a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) a(i, j) = a(j, i) = g(rng);
  return a;
}

/// Well-conditioned PD matrix: BBᵀ + n·I.
inline Mat random_pd(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat b(n, n);
  for (auto& v : b.reshaped()) v = g(rng);
  return b * b.transpose() + static_cast<double>(n) * Mat::Identity(n, n);
}

/// Blocks strictly inside DD₂ (x, y > |z|), hence also inside SDD₂.
inline ddsdp::BlockSet<double> random_dd_blocks(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 2.0);
  std::uniform_real_distribution<double> f(-0.95, 0.95);
  ddsdp::BlockSet<double> b(n);
  for (Eigen::Index k = 0; k < b.block_count(); ++k) {
    const double x = u(rng), y = u(rng);
    b.coords()(3 * k) = x;
    b.coords()(3 * k + 1) = y;
    b.coords()(3 * k + 2) = f(rng) * std::min(x, y);
  }
  return b;
}

/// Blocks strictly inside SDD₂ (x, y > 0, xy > z²).
inline ddsdp::BlockSet<double> random_sdd_blocks(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 2.0);
  std::uniform_real_distribution<double> f(-0.95, 0.95);
  ddsdp::BlockSet<double> b(n);
  for (Eigen::Index k = 0; k < b.block_count(); ++k) {
    const double x = u(rng), y = u(rng);
    b.coords()(3 * k) = x;
    b.coords()(3 * k + 1) = y;
    b.coords()(3 * k + 2) = f(rng) * std::sqrt(x * y);
  }
  return b;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

/// Relative error of vectors in the max norm, floored at unit scale.
inline double rel_err(const Vec& a, const Vec& b) {
  return (a - b).lpNorm<Eigen::Infinity>() / std::max(1.0, std::max(a.lpNorm<Eigen::Infinity>(), b.lpNorm<Eigen::Infinity>()));
}

}  // namespace testing_support
