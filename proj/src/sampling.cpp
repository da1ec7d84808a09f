#include "tolerant/sampling.hpp"

#include <stdexcept>

namespace tolerant {

Histogram sample_histogram_poisson(const Pmf& p, double m, RngStream& rng) {
  if (m <= 0) throw std::invalid_argument("sample_histogram_poisson: budget must be positive");
  Histogram h;
  h.budget_m = m;
  h.counts.resize(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) h.counts[i] = rng.poisson(m * p[i]);
  return h;
}

Histogram sample_histogram_fixed(const Pmf& p, std::int64_t m, RngStream& rng) {
  if (m < 1) throw std::invalid_argument("sample_histogram_fixed: budget must be positive");
  Histogram h;
  h.budget_m = static_cast<double>(m);
  h.counts = CountVector::Zero(p.size());

  // Sequential conditional binomials for an exact multinomial draw.
  std::int64_t remaining = m;
  double mass_left = 1.0;
  for (Eigen::Index i = 0; i < p.size() && remaining > 0; ++i) {
    if (i == p.size() - 1) {
      h.counts[i] = remaining;
      break;
    }
    double cond = mass_left > 0 ? p[i] / mass_left : 1.0;
    if (cond > 1.0) cond = 1.0;
    const std::int64_t c = rng.binomial(remaining, cond);
    h.counts[i] = c;
    remaining -= c;
    mass_left -= p[i];
  }
  return h;
}

}  // namespace tolerant
