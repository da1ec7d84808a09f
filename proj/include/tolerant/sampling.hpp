#pragma once

#include <cstdint>

#include "tolerant/pmf.hpp"
#include "tolerant/rng.hpp"

namespace tolerant {

// Per-symbol occurrence counts from one sample set, together with the budget
// (Poisson rate or fixed draw count) it was drawn with.
struct Histogram {
  CountVector counts;
  double budget_m = 0.0;

  Eigen::Index size() const { return counts.size(); }
  std::int64_t total() const { return counts.sum(); }
};

// Poissonized sampling: count_i ~ Poi(m * p_i), independently per symbol.
Histogram sample_histogram_poisson(const Pmf& p, double m, RngStream& rng);

// Fixed-budget sampling: counts follow Multinomial(m, p); they sum to m.
Histogram sample_histogram_fixed(const Pmf& p, std::int64_t m, RngStream& rng);

}  // namespace tolerant
