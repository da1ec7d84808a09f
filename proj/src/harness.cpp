#include "tolerant/harness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tolerant/sampling.hpp"
#include "tolerant/splitting.hpp"

namespace tolerant {

WilsonInterval wilson_interval(int successes, int trials, double z) {
  if (trials <= 0 || successes < 0 || successes > trials)
    throw std::invalid_argument("wilson_interval: invalid counts");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = p + z2 / (2.0 * n);
  const double spread = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  WilsonInterval w{std::max(0.0, (center - spread) / denom),
                   std::min(1.0, (center + spread) / denom)};
  if (successes == 0) w.lo = 0.0;
  if (successes == trials) w.hi = 1.0;
  return w;
}

void ExperimentSpec::validate() const {
  if (n < 1) throw std::invalid_argument("ExperimentSpec: domain size must be positive");
  if (trials < 1) throw std::invalid_argument("ExperimentSpec: trials must be >= 1");
  if (!(eps1 < eps2)) throw std::invalid_argument("ExperimentSpec: requires eps1 < eps2");
}

namespace {

// Pairwise (1 +/- eps/n)-style perturbation that also handles odd domain
// sizes (the trailing symbol stays uniform); l1 distance to uniform is
// exactly eps.
Pmf perturbed_uniform(Eigen::Index n, double eps, RngStream& rng) {
  if (eps == 0) return make_uniform(n);
  if (n % 2 == 0) return paninski_perturbation(n, eps, rng);
  const Eigen::Index pairs = n / 2;
  const double base = 1.0 / static_cast<double>(n);
  const double delta = eps / static_cast<double>(2 * pairs);
  if (delta > base)
    throw std::invalid_argument("perturbed_uniform: eps too large for odd domain");
  Vector w = Vector::Constant(n, base);
  for (Eigen::Index k = 0; k < pairs; ++k) {
    const double sign = (rng() & 1u) ? 1.0 : -1.0;
    w[2 * k] += sign * delta;
    w[2 * k + 1] -= sign * delta;
  }
  return Pmf(std::move(w));
}

struct TrialInstance {
  Pmf q;
  Pmf p;
  double realized_l1;
  bool consistent;
};

TrialInstance make_instance(const ExperimentSpec& spec, bool far, RngStream& rng) {
  switch (spec.family) {
    case InstanceFamily::kPaninski: {
      Pmf q = spec.custom_q.value_or(make_uniform(spec.n));
      Pmf p = far ? perturbed_uniform(spec.n, spec.eps2, rng)
                  : perturbed_uniform(spec.n, spec.eps1, rng);
      const double d = l1_distance(p, q);
      const bool ok = far ? d >= spec.eps2 - 1e-9 : d <= spec.eps1 + 1e-9;
      return {std::move(q), std::move(p), d, ok};
    }
    case InstanceFamily::kEmbedded: {
      Pmf q = spec.custom_q.value_or(make_zipf(spec.n, 1.0));
      IndexList all(q.size());
      for (Eigen::Index i = 0; i < q.size(); ++i) all[static_cast<std::size_t>(i)] = i;
      const EmbeddingSpec emb = build_embedding(q, all);
      const double target = far ? spec.eps2 : spec.eps1;
      const double small_eps = 4.0 * target / emb.subset_mass;
      if (small_eps > 1.0)
        throw std::invalid_argument("make_instance: embedded target distance out of range");
      const Pmf p_small = perturbed_uniform(emb.rat, small_eps, rng);
      Pmf p = embed_uniform_instance(q, emb, p_small);
      const double d = l1_distance(p, q);
      const bool ok = far ? d >= spec.eps2 - 1e-9 : d <= spec.eps1 + 1e-9;
      return {std::move(q), std::move(p), d, ok};
    }
    case InstanceFamily::kPriorPair: {
      if (!spec.prior)
        throw std::invalid_argument("make_instance: prior_pair family needs a solved pair");
      const PriorDraw draw = build_prior_instance(
          *spec.prior, spec.n, far ? PriorSide::kFar : PriorSide::kClose, rng);
      Pmf q = make_uniform(spec.n);
      const bool ok =
          !draw.event_held ||
          (far ? draw.l1_to_uniform >= spec.prior->eps2_effective / 2.0
               : draw.l1_to_uniform <= 25.0 * spec.prior->eps1_problem);
      return {std::move(q), draw.pmf, draw.l1_to_uniform, ok};
    }
    case InstanceFamily::kCustom: {
      if (!spec.custom_q || !spec.custom_p_close || !spec.custom_p_far)
        throw std::invalid_argument("make_instance: custom family needs q and both p files");
      Pmf q = *spec.custom_q;
      Pmf p = far ? *spec.custom_p_far : *spec.custom_p_close;
      const double d = l1_distance(p, q);
      const bool ok = far ? d >= spec.eps2 - 1e-9 : d <= spec.eps1 + 1e-9;
      return {std::move(q), std::move(p), d, ok};
    }
  }
  throw std::logic_error("make_instance: unknown family");
}

Verdict run_tester(const ExperimentSpec& spec, const TrialInstance& inst, double m,
                   RngStream& rng) {
  switch (spec.tester) {
    case TesterKind::kIdentity:
      return test_identity(inst.q, pmf_sampler(inst.p), m, spec.eps2, spec.delta,
                           spec.c, rng);
    case TesterKind::kEquivalence:
      return test_equivalence(pmf_sampler(inst.p), pmf_sampler(inst.q), m,
                              spec.eps2, spec.delta, spec.c, rng);
    case TesterKind::kInstanceOptimal: {
      const IoVerdict io = io_test_identity(inst.q, pmf_sampler(inst.p), spec.eps1,
                                            spec.eps2, spec.c, rng);
      Verdict v;
      v.decision = io.decision;
      v.z = io.decision == Decision::kFar ? 1.0 : 0.0;
      v.tau = 0.5;
      return v;
    }
  }
  throw std::logic_error("run_tester: unknown tester kind");
}

}  // namespace

std::vector<ErrorRateRow> estimate_error_rate(const ExperimentSpec& spec) {
  return estimate_error_rate(spec, nullptr);
}

std::vector<ErrorRateRow> estimate_error_rate(const ExperimentSpec& spec,
                                              std::vector<TrialRecord>* records) {
  spec.validate();
  RngStream root(spec.seed, 0);
  std::vector<ErrorRateRow> rows;
  rows.reserve(spec.m_grid.size());
  for (std::size_t mi = 0; mi < spec.m_grid.size(); ++mi) {
    const double m = spec.m_grid[mi];
    ErrorRateRow row;
    row.m = m;
    row.trials = spec.trials;
    int close_errors = 0, far_errors = 0;
    for (int side = 0; side < 2; ++side) {
      const bool far = side == 1;
      for (int t = 0; t < spec.trials; ++t) {
        RngStream trial = root.substream((mi << 24) ^ (static_cast<std::uint64_t>(far) << 23) ^
                                         static_cast<std::uint64_t>(t));
        RngStream inst_rng = trial.substream(0);
        RngStream test_rng = trial.substream(1);
        const TrialInstance inst = make_instance(spec, far, inst_rng);
        const Verdict v = run_tester(spec, inst, m, test_rng);
        const bool wrong = far ? v.decision == Decision::kClose
                               : v.decision == Decision::kFar;
        if (wrong) (far ? far_errors : close_errors)++;
        if (records)
          records->push_back({m, far, v, inst.realized_l1, inst.consistent});
      }
    }
    row.close_error = static_cast<double>(close_errors) / spec.trials;
    row.far_error = static_cast<double>(far_errors) / spec.trials;
    row.close_ci = wilson_interval(close_errors, spec.trials);
    row.far_ci = wilson_interval(far_errors, spec.trials);
    rows.push_back(row);
  }
  return rows;
}

CalibrationResult calibrate_constant(Eigen::Index n, double eps2, int trials,
                                     RngStream& rng) {
  if (trials < 200)
    throw std::invalid_argument("calibrate_constant: need at least 200 trials");
  const double m = 8.0 * std::sqrt(static_cast<double>(n)) / (eps2 * eps2);
  const Pmf q = make_uniform(n);
  const SplitMap map = build_split_map(q);
  const Pmf q_split = split_pmf(q, map);
  const Eigen::Index n_split = map.new_domain_size();
  const double nd = static_cast<double>(n_split);
  const double tau_base =
      std::min(std::pow(m, 1.5) * eps2 / std::sqrt(nd), m * m * eps2 * eps2 / nd);

  auto z_sample = [&](const Pmf& p, RngStream& trial) {
    RngStream s1p = trial.substream(0), s1q = trial.substream(1);
    RngStream s2p = trial.substream(2), s2q = trial.substream(3);
    RngStream sp1 = trial.substream(4), sp2 = trial.substream(5);
    const Histogram h1p =
        split_histogram(sample_histogram_poisson(p, m, s1p), map, sp1);
    const Histogram h2p =
        split_histogram(sample_histogram_poisson(p, m, s2p), map, sp2);
    const Histogram h1q = sample_histogram_poisson(q_split, m, s1q);
    const Histogram h2q = sample_histogram_poisson(q_split, m, s2q);
    const Vector fhat = scaling_estimates(h1p, h1q, m, n_split);
    return statistic_z(h2p, h2q, fhat);
  };

  std::vector<double> z_close(trials), z_far(trials);
  for (int t = 0; t < trials; ++t) {
    RngStream trial = rng.substream(static_cast<std::uint64_t>(t));
    RngStream far_rng = trial.substream(7);
    z_close[t] = z_sample(q, trial);
    const Pmf p_far = paninski_perturbation(n, eps2, far_rng);
    RngStream far_trial = trial.substream(8);
    z_far[t] = z_sample(p_far, far_trial);
  }
  std::sort(z_close.begin(), z_close.end());
  std::sort(z_far.begin(), z_far.end());

  // Both error curves are step functions of c: false-Far counts
  // z_close >= c tau_base and false-Close counts z_far < c tau_base, so the
  // feasible interval comes from the 1/5 order statistics.
  const int budget = trials / 5;
  const double c_lo =
      std::max(1e-12, z_close[trials - budget - 1] / tau_base);
  const double c_hi = z_far[budget] / tau_base;
  if (!(c_lo < c_hi))
    throw std::runtime_error(
        "calibrate_constant: no feasible c at this budget (close 80th pct Z = " +
        std::to_string(z_close[trials - budget - 1]) +
        ", far 20th pct Z = " + std::to_string(z_far[budget]) + ")");

  CalibrationResult out;
  out.c_lo = c_lo;
  out.c_hi = c_hi;
  out.c = (c_lo + c_hi) / 2.0;
  const double tau = out.c * tau_base;
  out.close_error = static_cast<double>(std::count_if(
                        z_close.begin(), z_close.end(),
                        [&](double z) { return z >= tau; })) /
                    trials;
  out.far_error = static_cast<double>(std::count_if(
                      z_far.begin(), z_far.end(),
                      [&](double z) { return z < tau; })) /
                  trials;
  return out;
}

SampleComplexityResult find_sample_complexity(const ExperimentSpec& spec,
                                              double target_error) {
  if (!(target_error > 0 && target_error < 0.5))
    throw std::invalid_argument("find_sample_complexity: target must be in (0, 1/2)");
  const double cap = 64.0 * static_cast<double>(spec.n);

  auto passes = [&](double m) {
    ExperimentSpec one = spec;
    one.m_grid = {m};
    const auto rows = estimate_error_rate(one);
    return rows[0].close_ci.hi <= target_error && rows[0].far_ci.hi <= target_error;
  };

  double m = 8.0;
  while (m < cap && !passes(m)) m *= 2.0;
  if (m >= cap && !passes(cap)) return {cap, true};
  if (m > cap) m = cap;

  double lo = m / 2.0, hi = m;
  while (hi / lo > 1.05) {
    const double mid = std::sqrt(lo * hi);
    if (passes(mid))
      hi = mid;
    else
      lo = mid;
  }
  return {hi, false};
}

std::string dominant_term_label(Eigen::Index n, double eps1, double eps2) {
  const double nd = static_cast<double>(n);
  const double rho = eps1 / (eps2 * eps2);
  const double t1 = std::sqrt(nd) / (eps2 * eps2);
  const double t2 = nd * rho;
  const double t3 = nd * rho * rho;
  if (t1 >= t2 && t1 >= t3) return "sqrt_n_over_eps2_sq";
  if (t2 >= t3) return "n_rho";
  return "n_rho_sq";
}

std::vector<PhaseDiagramRow> phase_diagram(Eigen::Index n,
                                           const std::vector<double>& eps1_grid,
                                           const std::vector<double>& eps2_grid,
                                           int trials, std::uint64_t seed) {
  std::vector<PhaseDiagramRow> rows;
  for (double e1 : eps1_grid) {
    for (double e2 : eps2_grid) {
      if (!(e1 < e2)) continue;
      ExperimentSpec spec;
      spec.n = n;
      spec.eps1 = e1;
      spec.eps2 = e2;
      spec.tester = TesterKind::kIdentity;
      spec.family = InstanceFamily::kPaninski;
      spec.trials = trials;
      spec.seed = seed ^ std::hash<double>{}(e1 * 131.0 + e2);
      const SampleComplexityResult r = find_sample_complexity(spec, 0.25);
      rows.push_back({e1, e2, r.m_star, r.capped, dominant_term_label(n, e1, e2)});
    }
  }
  return rows;
}

bool eps1_within_theorem_range(double eps1, double eps2) {
  return eps1 <= eps2 / 8.0;
}

}  // namespace tolerant
