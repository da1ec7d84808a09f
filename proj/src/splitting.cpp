#include "tolerant/splitting.hpp"

#include <cmath>
#include <stdexcept>

namespace tolerant {

SplitMap build_split_map(const Pmf& q) {
  const Eigen::Index n = q.size();
  SplitMap map;
  map.block_sizes.resize(n);
  map.offsets.resize(n + 1);
  map.offsets[0] = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    map.block_sizes[i] =
        1 + static_cast<std::int64_t>(std::floor(static_cast<double>(n) * q[i]));
    map.offsets[i + 1] = map.offsets[i] + map.block_sizes[i];
  }
  return map;
}

Pmf split_pmf(const Pmf& p, const SplitMap& map) {
  if (p.size() != map.original_domain_size())
    throw std::invalid_argument("split_pmf: pmf does not match split map domain");
  Vector w(map.new_domain_size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double cell = p[i] / static_cast<double>(map.block_sizes[i]);
    for (std::int64_t j = map.offsets[i]; j < map.offsets[i + 1]; ++j)
      w[static_cast<Eigen::Index>(j)] = cell;
  }
  return Pmf(std::move(w));
}

Histogram split_histogram(const Histogram& h, const SplitMap& map, RngStream& rng) {
  if (h.size() != map.original_domain_size())
    throw std::invalid_argument("split_histogram: histogram does not match split map domain");
  Histogram out;
  out.budget_m = h.budget_m;
  out.counts = CountVector::Zero(map.new_domain_size());
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    const std::int64_t a = map.block_sizes[i];
    std::int64_t remaining = h.counts[i];
    if (a == 1) {
      out.counts[static_cast<Eigen::Index>(map.offsets[i])] = remaining;
      continue;
    }
    // Uniform multinomial over the a cells, drawn as sequential binomials.
    for (std::int64_t j = 0; j < a && remaining > 0; ++j) {
      if (j == a - 1) {
        out.counts[static_cast<Eigen::Index>(map.offsets[i] + j)] += remaining;
        remaining = 0;
        break;
      }
      const std::int64_t c = rng.binomial(remaining, 1.0 / static_cast<double>(a - j));
      out.counts[static_cast<Eigen::Index>(map.offsets[i] + j)] += c;
      remaining -= c;
    }
  }
  return out;
}

}  // namespace tolerant
