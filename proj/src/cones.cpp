#include "ddsdp/cones.hpp"

#include <algorithm>

namespace ddsdp {

EdgeColoring edge_coloring(Eigen::Index n) {
  if (n < 2 || n % 2 != 0) throw OddOrder(n);
  const Eigen::Index spin = n - 1;
  EdgeColoring out;
  out.order = n;
  out.rounds.resize(static_cast<std::size_t>(spin));
  for (Eigen::Index r = 0; r < spin; ++r) {
    auto& round = out.rounds[static_cast<std::size_t>(r)];
    round.reserve(static_cast<std::size_t>(n / 2));
    round.emplace_back(r, n - 1);
    for (Eigen::Index k = 1; k < n / 2; ++k) {
      Eigen::Index a = (r + k) % spin;
      Eigen::Index b = (r - k + spin) % spin;
      if (a > b) std::swap(a, b);
      round.emplace_back(a, b);
    }
    std::sort(round.begin(), round.end());
  }
  return out;
}

}  // namespace ddsdp
