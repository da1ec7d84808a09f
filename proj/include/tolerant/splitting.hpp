#pragma once

#include <cstdint>

#include "tolerant/pmf.hpp"
#include "tolerant/rng.hpp"
#include "tolerant/sampling.hpp"

namespace tolerant {

// Domain expansion with respect to a reference q: symbol i maps to a block of
// a_i = 1 + floor(n q_i) cells, flattened to integers via prefix-sum offsets.
// The new domain has at most 2n cells and splitting preserves pairwise l1
// distances while flattening the reference's l2 norm.
struct SplitMap {
  CountVector block_sizes;  // a_i per original symbol
  CountVector offsets;      // size n+1; block i occupies [offsets[i], offsets[i+1])
  Eigen::Index original_domain_size() const { return block_sizes.size(); }
  Eigen::Index new_domain_size() const {
    return static_cast<Eigen::Index>(offsets[offsets.size() - 1]);
  }
};

SplitMap build_split_map(const Pmf& q);

// Spreads p_i uniformly over block i: each of the a_i cells gets p_i / a_i.
Pmf split_pmf(const Pmf& p, const SplitMap& map);

// Reassigns each recorded occurrence of symbol i to a uniformly random cell
// of block i (multinomially per symbol); total count is preserved.
Histogram split_histogram(const Histogram& h, const SplitMap& map, RngStream& rng);

}  // namespace tolerant
