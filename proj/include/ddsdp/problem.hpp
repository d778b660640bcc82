#pragma once

// Problem ingestion: SDPA sparse reader/writer, orthonormalization of the
// constraint data, random instances and objective recovery.
//
// Every problem is kept in the minimization form
//   min Tr(CᵀX)  s.t.  Tr(A_iᵀX) = b_i,  X ⪰ 0.
// SDPA files describe the maximization max Tr(F₀ᵀY) s.t. Tr(F_iᵀY) = c_i, so
// the reader stores C = −F₀, A_i = F_i, b = c.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ddsdp/symmat.hpp"

namespace ddsdp {

struct RawSdp {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  Mat cost;
  std::vector<Mat> constraints;
  Vec rhs;
  std::vector<int> block_structure;
  std::string name;
};

/// Data after orthonormalization: Tr(A_iA_j) = δ_ij, Tr(A_iC) = 0, ‖C‖_F = 1.
/// The original objective of any feasible X is cost_scale·Tr(CX) + cost_offset.
struct NormalizedSdp {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  Mat cost;
  std::vector<Mat> constraints;
  Vec rhs;
  double cost_scale = 1.0;
  double cost_offset = 0.0;
  /// Upper-triangular R with original A_j = Σ_i R(i, j)·A_n,i.
  Mat transform;
  std::string name;

  /// The cost lies in the span of the constraints: every feasible point is optimal.
  bool degenerate() const { return cost_scale == 0.0; }
};

/// Symmetric vectorization (upper triangle, row-major, off-diagonals scaled
/// by √2) so the Euclidean inner product equals the trace inner product.
Vec svec(const Mat& x);
Mat smat(const Vec& v, Eigen::Index n);

RawSdp parse_sdpa(std::istream& in);
RawSdp parse_sdpa_text(const std::string& text);
RawSdp load_sdpa(const std::string& path);

/// Writes SDPA sparse format (restoring the file's maximization sign).
void write_sdpa(const RawSdp& raw, std::ostream& out);

/// Pivots below this fraction of the largest pivot flag a dependent constraint.
inline constexpr double kRankTolerance = 1e-10;

NormalizedSdp normalize(const RawSdp& raw);

/// Random instance with X = I strictly feasible. The first constraint is the
/// trace (A₁ = I) so the feasible set is bounded; the remaining constraints
/// and the cost have independent standard normal entries.
RawSdp random_sdp(Eigen::Index n, Eigen::Index m, std::uint64_t seed);

/// Original minimization objective of X.
double recover_objective(const NormalizedSdp& norm, const Mat& x);

/// max_i |Tr(A_iX) − b_i|.
double constraint_residual(const NormalizedSdp& norm, const Mat& x);
double constraint_residual(const RawSdp& raw, const Mat& x);

}  // namespace ddsdp
