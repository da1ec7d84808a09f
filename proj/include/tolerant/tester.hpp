#pragma once

#include <functional>

#include "tolerant/pmf.hpp"
#include "tolerant/rng.hpp"
#include "tolerant/sampling.hpp"
#include "tolerant/splitting.hpp"

namespace tolerant {

// Threshold constant selected by harness::calibrate_constant at n = 1000,
// eps2 = 0.5 (400 trials per side, seed 20240901).
inline constexpr double kDefaultThresholdC = 0.4168;

// Core test parameters. The statistic needs no knowledge of eps1; only eps2,
// the per-set Poisson budget m, the domain size n, and the threshold constant
// c enter the decision.
struct TesterConfig {
  double eps2 = 0.0;
  double m = 0.0;
  Eigen::Index n = 0;
  double c = kDefaultThresholdC;

  // The scaling factors change shape at m >= n.
  bool high_sample_regime() const { return m >= static_cast<double>(n); }

  void validate() const;
};

enum class Decision { kClose, kFar };

struct Verdict {
  Decision decision = Decision::kClose;
  double z = 0.0;
  double tau = 0.0;
};

// True per-symbol scaling factor f_i:
//   m >= n: max{ sqrt(mn) |p_i - q_i|, n (p_i + q_i), 1 }
//   m <  n: max{ m (p_i + q_i), 1 }
double scaling_factor_true(double p_i, double q_i, double m, Eigen::Index n);

// Empirical estimate fhat_i from the held-out counts:
//   m >= n: max{ |Xt_i - Yt_i| / sqrt(m/n), (Xt_i + Yt_i) / (m/n), 1 }
//   m <  n: max{ Xt_i + Yt_i, 1 }
double scaling_factor_estimate(std::int64_t xt_i, std::int64_t yt_i, double m,
                               Eigen::Index n);

// fhat for every symbol from the first sample sets.
Vector scaling_estimates(const Histogram& xt, const Histogram& yt, double m,
                         Eigen::Index n);

// Z = sum_i ((X_i - Y_i)^2 - X_i - Y_i) / fhat_i. Every fhat_i must be >= 1.
double statistic_z(const Histogram& x, const Histogram& y, const Vector& fhat);

// tau = c min( m^{3/2} eps2 / sqrt(n), m^2 eps2^2 / n ).
double threshold_tau(const TesterConfig& cfg);

// Exact per-symbol moments of Z_i under Poissonized sampling; used as test
// oracles.  E[Z_i] = m^2 (p_i - q_i)^2,
// Var[Z_i] = 4 m^3 (p_i - q_i)^2 (p_i + q_i) + 2 m^2 (p_i + q_i)^2.
Vector expected_z_exact(const Pmf& p, const Pmf& q, double m);
Vector variance_z_exact(const Pmf& p, const Pmf& q, double m);

// One run of the core tester: fhat from the first pair of sample sets, Z from
// the second, Far iff Z >= tau.
Verdict run_core_test(const Histogram& set1_p, const Histogram& set1_q,
                      const Histogram& set2_p, const Histogram& set2_q,
                      const TesterConfig& cfg);

// Produces one Poissonized histogram with the requested budget on demand.
using PoissonSampler = std::function<Histogram(double m, RngStream& rng)>;

PoissonSampler pmf_sampler(Pmf p);

// Number of core repetitions for failure probability delta: a single run for
// delta >= 1/5 (the base guarantee), otherwise ceil(18 ln(1/delta)) majority
// repetitions.
int amplification_count(double delta);

// Two-sample tolerant test with majority amplification. Each repetition draws
// two fresh sets of Poi(m) samples from both sources.
Verdict test_equivalence(const PoissonSampler& p_source,
                         const PoissonSampler& q_source, double m, double eps2,
                         double delta, double c, RngStream& rng);

// Identity test against an explicitly known q: p-samples are routed through
// the splitting map of q, reference samples are drawn directly from split q,
// and the core tester runs on the split domain.
Verdict test_identity(const Pmf& q, const PoissonSampler& p_source, double m,
                      double eps2, double delta, double c, RngStream& rng);

}  // namespace tolerant
