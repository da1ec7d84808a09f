#include "tolerant/tester.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace tolerant {

void TesterConfig::validate() const {
  if (eps2 <= 0 || eps2 > 1)
    throw std::invalid_argument("TesterConfig: eps2 must be in (0,1]");
  if (m <= 0) throw std::invalid_argument("TesterConfig: budget m must be positive");
  if (n < 1) throw std::invalid_argument("TesterConfig: domain size must be positive");
  if (c <= 0) throw std::invalid_argument("TesterConfig: constant c must be positive");
}

double scaling_factor_true(double p_i, double q_i, double m, Eigen::Index n) {
  const double nd = static_cast<double>(n);
  if (m >= nd) {
    return std::max({std::sqrt(m * nd) * std::abs(p_i - q_i), nd * (p_i + q_i), 1.0});
  }
  return std::max(m * (p_i + q_i), 1.0);
}

double scaling_factor_estimate(std::int64_t xt_i, std::int64_t yt_i, double m,
                               Eigen::Index n) {
  const double nd = static_cast<double>(n);
  const double sum = static_cast<double>(xt_i + yt_i);
  if (m >= nd) {
    const double diff = std::abs(static_cast<double>(xt_i - yt_i));
    return std::max({diff / std::sqrt(m / nd), sum / (m / nd), 1.0});
  }
  return std::max(sum, 1.0);
}

Vector scaling_estimates(const Histogram& xt, const Histogram& yt, double m,
                         Eigen::Index n) {
  if (xt.size() != n || yt.size() != n)
    throw std::invalid_argument("scaling_estimates: histogram size mismatch");
  Vector fhat(n);
  for (Eigen::Index i = 0; i < n; ++i)
    fhat[i] = scaling_factor_estimate(xt.counts[i], yt.counts[i], m, n);
  return fhat;
}

double statistic_z(const Histogram& x, const Histogram& y, const Vector& fhat) {
  if (x.size() != y.size() || x.size() != fhat.size())
    throw std::invalid_argument("statistic_z: size mismatch");
  if ((fhat.array() < 1.0).any())
    throw std::invalid_argument("statistic_z: scaling factors must be >= 1");
  double z = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x.counts[i] - y.counts[i]);
    const double zi = d * d - static_cast<double>(x.counts[i] + y.counts[i]);
    z += zi / fhat[i];
  }
  return z;
}

double threshold_tau(const TesterConfig& cfg) {
  cfg.validate();
  const double nd = static_cast<double>(cfg.n);
  return cfg.c * std::min(std::pow(cfg.m, 1.5) * cfg.eps2 / std::sqrt(nd),
                          cfg.m * cfg.m * cfg.eps2 * cfg.eps2 / nd);
}

Vector expected_z_exact(const Pmf& p, const Pmf& q, double m) {
  if (p.size() != q.size())
    throw std::invalid_argument("expected_z_exact: mismatched domains");
  return (m * m) * (p.weights() - q.weights()).array().square().matrix();
}

Vector variance_z_exact(const Pmf& p, const Pmf& q, double m) {
  if (p.size() != q.size())
    throw std::invalid_argument("variance_z_exact: mismatched domains");
  const auto diff2 = (p.weights() - q.weights()).array().square();
  const auto sum = (p.weights() + q.weights()).array();
  return (4.0 * m * m * m * diff2 * sum + 2.0 * m * m * sum.square()).matrix();
}

Verdict run_core_test(const Histogram& set1_p, const Histogram& set1_q,
                      const Histogram& set2_p, const Histogram& set2_q,
                      const TesterConfig& cfg) {
  cfg.validate();
  if (set1_p.size() != cfg.n || set1_q.size() != cfg.n || set2_p.size() != cfg.n ||
      set2_q.size() != cfg.n)
    throw std::invalid_argument("run_core_test: histogram size mismatch");
  const Vector fhat = scaling_estimates(set1_p, set1_q, cfg.m, cfg.n);
  Verdict v;
  v.z = statistic_z(set2_p, set2_q, fhat);
  v.tau = threshold_tau(cfg);
  v.decision = v.z >= v.tau ? Decision::kFar : Decision::kClose;
  return v;
}

PoissonSampler pmf_sampler(Pmf p) {
  return [p = std::move(p)](double m, RngStream& rng) {
    return sample_histogram_poisson(p, m, rng);
  };
}

int amplification_count(double delta) {
  if (delta <= 0 || delta >= 1)
    throw std::invalid_argument("amplification_count: delta must be in (0,1)");
  if (delta >= 0.2) return 1;  // base guarantee of the core test
  return static_cast<int>(std::ceil(18.0 * std::log(1.0 / delta)));
}

namespace {

// Majority verdict over independent repetitions. The returned record is the
// run with the median z - tau margin, so its decision matches the majority
// (ties resolve toward Far, consistent with the Z >= tau rule).
Verdict majority_verdict(std::vector<Verdict> runs) {
  std::sort(runs.begin(), runs.end(), [](const Verdict& a, const Verdict& b) {
    return a.z - a.tau < b.z - b.tau;
  });
  return runs[runs.size() / 2];
}

}  // namespace

Verdict test_equivalence(const PoissonSampler& p_source,
                         const PoissonSampler& q_source, double m, double eps2,
                         double delta, double c, RngStream& rng) {
  const int k = amplification_count(delta);
  RngStream root = rng.substream(rng());  // consume state: fresh runs per call
  std::vector<Verdict> runs;
  runs.reserve(k);
  for (int r = 0; r < k; ++r) {
    RngStream trial = root.substream(static_cast<std::uint64_t>(r));
    RngStream s1p = trial.substream(0), s1q = trial.substream(1);
    RngStream s2p = trial.substream(2), s2q = trial.substream(3);
    const Histogram h1p = p_source(m, s1p);
    const Histogram h1q = q_source(m, s1q);
    const Histogram h2p = p_source(m, s2p);
    const Histogram h2q = q_source(m, s2q);
    TesterConfig cfg{eps2, m, h1p.size(), c};
    runs.push_back(run_core_test(h1p, h1q, h2p, h2q, cfg));
  }
  return majority_verdict(std::move(runs));
}

Verdict test_identity(const Pmf& q, const PoissonSampler& p_source, double m,
                      double eps2, double delta, double c, RngStream& rng) {
  const SplitMap map = build_split_map(q);
  const Pmf q_split = split_pmf(q, map);

  const int k = amplification_count(delta);
  RngStream root = rng.substream(rng());
  std::vector<Verdict> runs;
  runs.reserve(k);
  for (int r = 0; r < k; ++r) {
    RngStream trial = root.substream(static_cast<std::uint64_t>(r));
    RngStream s1p = trial.substream(0), s1q = trial.substream(1);
    RngStream s2p = trial.substream(2), s2q = trial.substream(3);
    RngStream split1 = trial.substream(4), split2 = trial.substream(5);

    const Histogram h1p = split_histogram(p_source(m, s1p), map, split1);
    const Histogram h2p = split_histogram(p_source(m, s2p), map, split2);
    // The reference is known explicitly, so its split samples are drawn
    // directly from split q.
    const Histogram h1q = sample_histogram_poisson(q_split, m, s1q);
    const Histogram h2q = sample_histogram_poisson(q_split, m, s2q);

    TesterConfig cfg{eps2, m, map.new_domain_size(), c};
    runs.push_back(run_core_test(h1p, h1q, h2p, h2q, cfg));
  }
  return majority_verdict(std::move(runs));
}

}  // namespace tolerant
