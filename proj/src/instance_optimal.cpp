#include "tolerant/instance_optimal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tolerant/splitting.hpp"

namespace tolerant {

namespace {

int bucket_index(double weight) {
  // Smallest j with weight > 2^-j, so weight lands in (2^-j, 2^-(j-1)].
  int j = 1;
  while (weight <= std::ldexp(1.0, -j)) ++j;
  return j;
}

}  // namespace

Bucketing build_bucketing(const Pmf& q, double eps2) {
  if (eps2 <= 0 || eps2 > 1)
    throw std::invalid_argument("build_bucketing: eps2 must be in (0,1]");
  const Eigen::Index n = q.size();

  Bucketing out;
  out.eps2 = eps2;
  out.ell = static_cast<int>(
                std::floor(std::log2(20.0 * static_cast<double>(n) / eps2))) +
            1;
  out.buckets.assign(out.ell, {});
  out.bucket_mass.assign(out.ell, 0.0);

  // D is exactly the removed set of the eps2/20 truncation.
  const SubPmf trimmed = truncate_mass(q, eps2 / 20.0);
  std::vector<bool> retained(n, false);
  for (Eigen::Index i : trimmed.retained_indices) retained[i] = true;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!retained[i]) out.low_mass.push_back(i);
  out.low_mass_total = trimmed.removed_mass;

  for (Eigen::Index i : trimmed.retained_indices) {
    const int j = bucket_index(q[i]);
    if (j > out.ell)
      throw std::logic_error("build_bucketing: weight below the dyadic range");
    out.buckets[j - 1].push_back(i);
    out.bucket_mass[j - 1] += q[i];
  }
  return out;
}

EffectiveSupportStats effective_support_stats(const Pmf& q, double alpha) {
  const SubPmf trimmed = truncate_mass(q, alpha);
  EffectiveSupportStats s;
  s.quasinorm_two_thirds = quasinorm(trimmed, 2.0 / 3.0);
  s.quasinorm_half = quasinorm(trimmed, 0.5);
  s.support = support_size(trimmed);
  return s;
}

Pmf conditional_pmf(const Pmf& q, const IndexList& subset) {
  if (subset.empty())
    throw std::invalid_argument("conditional_pmf: empty subset");
  double mass = 0.0;
  for (Eigen::Index i : subset) {
    if (i < 0 || i >= q.size())
      throw std::invalid_argument("conditional_pmf: index out of range");
    mass += q[i];
  }
  if (mass <= 0)
    throw std::invalid_argument("conditional_pmf: degenerate conditioning on zero mass");
  Vector w(static_cast<Eigen::Index>(subset.size()));
  for (std::size_t k = 0; k < subset.size(); ++k) w[static_cast<Eigen::Index>(k)] = q[subset[k]] / mass;
  return Pmf::normalized(std::move(w));
}

EmbeddingSpec build_embedding(const Pmf& q, const IndexList& subset) {
  if (subset.empty())
    throw std::invalid_argument("build_embedding: empty subset");
  EmbeddingSpec spec;
  spec.subset = subset;
  for (Eigen::Index i : subset) {
    if (i < 0 || i >= q.size())
      throw std::invalid_argument("build_embedding: index out of range");
    spec.mas = std::max(spec.mas, q[i]);
    spec.subset_mass += q[i];
  }
  if (spec.mas <= 0)
    throw std::invalid_argument("build_embedding: subset has zero mass");
  spec.rat = static_cast<std::int64_t>(std::floor(spec.subset_mass / (2.0 * spec.mas)));
  if (spec.rat < 1)
    throw std::invalid_argument("build_embedding: subset too light, rat(q,S) < 1");

  // Greedy blocks of mass >= mas; a trailing remainder (mass < mas) merges
  // into the final block.
  IndexList block;
  double mass = 0.0;
  for (Eigen::Index i : subset) {
    block.push_back(i);
    mass += q[i];
    if (mass >= spec.mas) {
      spec.blocks.push_back(std::move(block));
      spec.block_mass.push_back(mass);
      block.clear();
      mass = 0.0;
    }
  }
  if (!block.empty()) {
    auto& last = spec.blocks.back();
    last.insert(last.end(), block.begin(), block.end());
    spec.block_mass.back() += mass;
  }
  if (static_cast<std::int64_t>(spec.blocks.size()) < spec.rat)
    throw std::logic_error("build_embedding: fewer blocks than rat(q,S)");
  return spec;
}

Pmf embed_uniform_instance(const Pmf& q, const EmbeddingSpec& spec,
                           const Pmf& p_small) {
  if (p_small.size() != spec.rat)
    throw std::invalid_argument(
        "embed_uniform_instance: planted pmf must live on [rat(q,S)]");
  Vector w = q.weights();
  const double inv_rat = 1.0 / static_cast<double>(spec.rat);
  for (std::int64_t j = 0; j < spec.rat; ++j) {
    const double shift =
        spec.subset_mass / (4.0 * spec.block_mass[static_cast<std::size_t>(j)]) *
        (p_small[static_cast<Eigen::Index>(j)] - inv_rat);
    for (Eigen::Index i : spec.blocks[static_cast<std::size_t>(j)]) {
      w[i] = q[i] + q[i] * shift;
      if (w[i] < 0) w[i] = std::max(w[i], 0.0);  // guards rounding at exact zero
    }
  }
  return Pmf(std::move(w));
}

Pmf embed_uniform_instance(const Pmf& q, const IndexList& subset,
                           const Pmf& p_small) {
  return embed_uniform_instance(q, build_embedding(q, subset), p_small);
}

namespace {

// Smallest odd repetition count whose majority-of-k failure (per-run error
// 1/5) is at most `target`, via the Chernoff bound exp(-k KL(1/2 || 1/5)).
int io_repetitions(double target) {
  const double kl = 0.5 * std::log(0.5 / 0.2) + 0.5 * std::log(0.5 / 0.8);
  int k = static_cast<int>(std::ceil(std::log(1.0 / target) / kl));
  if (k < 1) k = 1;
  if (k % 2 == 0) ++k;
  return k;
}

}  // namespace

IoBudget io_budget_plan(const Pmf& q, double eps2) {
  const Bucketing bk = build_bucketing(q, eps2);
  const double ell = static_cast<double>(bk.ell);
  IoBudget plan;
  plan.ell = bk.ell;
  plan.mass_batch = std::ceil(32.0 * ell * ell * std::log(std::max(ell, 2.0)) /
                              (eps2 * eps2));
  plan.repetitions = io_repetitions(1.0 / (5.0 * (2.0 * ell + 1.0)));
  for (int j = 0; j < bk.ell; ++j) {
    if (bk.bucket_mass[j] < eps2 / (5.0 * ell)) continue;
    const double mass = bk.bucket_mass[j];
    const double eps2_j = eps2 / (5.0 * ell * mass);
    const SplitMap map = build_split_map(conditional_pmf(q, bk.buckets[j]));
    const double split_n = static_cast<double>(map.new_domain_size());
    plan.core_budget = std::max(
        plan.core_budget, 8.0 * std::sqrt(split_n) / (eps2_j * eps2_j * mass));
  }
  return plan;
}

namespace {

double subset_mass_estimate(const Histogram& h, const IndexList& subset) {
  std::int64_t c = 0;
  for (Eigen::Index i : subset) c += h.counts[i];
  return static_cast<double>(c) / h.budget_m;
}

Histogram restrict_histogram(const Histogram& h, const IndexList& subset,
                             double budget) {
  Histogram out;
  out.budget_m = budget;
  out.counts.resize(static_cast<Eigen::Index>(subset.size()));
  for (std::size_t k = 0; k < subset.size(); ++k)
    out.counts[static_cast<Eigen::Index>(k)] = h.counts[subset[k]];
  return out;
}

}  // namespace

IoVerdict io_test_identity(const Pmf& q, const PoissonSampler& p_source,
                           double eps1, double eps2, double c, RngStream& rng) {
  if (eps2 <= 0 || eps2 > 1)
    throw std::invalid_argument("io_test_identity: eps2 must be in (0,1]");
  const Bucketing bk = build_bucketing(q, eps2);
  const double ell = static_cast<double>(bk.ell);
  if (eps1 < 0 || eps1 > eps2 / (40.0 * ell))
    throw std::invalid_argument(
        "io_test_identity: unsupported tolerance, requires eps1 <= eps2/(40 ell)");

  const IoBudget plan = io_budget_plan(q, eps2);
  RngStream root = rng.substream(rng());  // consume state: fresh runs per call
  IoVerdict verdict;
  verdict.ell = bk.ell;
  verdict.repetitions = plan.repetitions;

  // Dedicated batch for the mass sub-tests (1) and (2), Poissonized at the
  // planned budget 32 ell^2 log(ell) / eps2^2 to match the sampler contract.
  verdict.mass_batch_size = plan.mass_batch;
  RngStream mass_rng = root.substream(0xA11CE);
  const Histogram mass_hist = p_source(plan.mass_batch, mass_rng);
  const double margin =
      std::sqrt(std::log(20.0 * (2.0 * ell + 1.0)) / (2.0 * plan.mass_batch));

  bool all_accept = true;

  // Sub-test (1): low-mass set not inflated.
  {
    const double estimate = subset_mass_estimate(mass_hist, bk.low_mass);
    const double midpoint = (eps2 / 20.0 + eps1 + eps2 / 5.0) / 2.0;
    const double threshold = std::max(midpoint, eps2 / 20.0 + eps1 + margin);
    SubTestResult r{1, -1, estimate < threshold, estimate, threshold};
    all_accept &= r.accepted;
    verdict.subtests.push_back(r);
  }

  // Sub-tests (2): per-bucket masses match.
  for (int j = 0; j < bk.ell; ++j) {
    if (bk.buckets[j].empty()) continue;
    const double estimate = subset_mass_estimate(mass_hist, bk.buckets[j]);
    const double deviation = std::abs(estimate - bk.bucket_mass[j]);
    const double midpoint = (eps1 + eps2 / (10.0 * ell)) / 2.0;
    const double threshold = std::max(midpoint, eps1 + margin);
    SubTestResult r{2, j, deviation < threshold, deviation, threshold};
    all_accept &= r.accepted;
    verdict.subtests.push_back(r);
  }

  // Sub-tests (3): conditional tolerant tests on the heavy buckets, fed by
  // shared Poissonized batches restricted per bucket.
  struct HeavyBucket {
    int index;
    double mass;
    double eps2_j;
    SplitMap map;
    Pmf q_split;
    int far_votes = 0;
  };
  std::vector<HeavyBucket> heavy;
  double core_budget = 0.0;
  for (int j = 0; j < bk.ell; ++j) {
    if (bk.bucket_mass[j] < eps2 / (5.0 * ell)) continue;
    const double mass = bk.bucket_mass[j];
    const double eps2_j = eps2 / (5.0 * ell * mass);
    const Pmf q_j = conditional_pmf(q, bk.buckets[j]);
    SplitMap map = build_split_map(q_j);
    Pmf q_split = split_pmf(q_j, map);
    const double split_n = static_cast<double>(map.new_domain_size());
    core_budget = std::max(core_budget,
                           8.0 * std::sqrt(split_n) / (eps2_j * eps2_j * mass));
    heavy.push_back(
        HeavyBucket{j, mass, eps2_j, std::move(map), std::move(q_split), 0});
  }
  verdict.core_budget = core_budget;

  if (!heavy.empty()) {
    for (int rep = 0; rep < verdict.repetitions; ++rep) {
      RngStream rep_rng = root.substream(0xC0FE + static_cast<std::uint64_t>(rep));
      RngStream sp1 = rep_rng.substream(0), sp2 = rep_rng.substream(1);
      const Histogram batch1 = p_source(core_budget, sp1);
      const Histogram batch2 = p_source(core_budget, sp2);
      std::uint64_t child = 2;
      for (auto& hb : heavy) {
        const double m_j = core_budget * hb.mass;
        RngStream split1 = rep_rng.substream(child++), split2 = rep_rng.substream(child++);
        RngStream qr1 = rep_rng.substream(child++), qr2 = rep_rng.substream(child++);
        const Histogram p1 = split_histogram(
            restrict_histogram(batch1, bk.buckets[hb.index], m_j), hb.map, split1);
        const Histogram p2 = split_histogram(
            restrict_histogram(batch2, bk.buckets[hb.index], m_j), hb.map, split2);
        const Histogram q1 = sample_histogram_poisson(hb.q_split, m_j, qr1);
        const Histogram q2 = sample_histogram_poisson(hb.q_split, m_j, qr2);
        TesterConfig cfg{hb.eps2_j, m_j, hb.map.new_domain_size(), c};
        const Verdict v = run_core_test(p1, q1, p2, q2, cfg);
        if (v.decision == Decision::kFar) ++hb.far_votes;
      }
    }
    for (const auto& hb : heavy) {
      const bool far = 2 * hb.far_votes >= verdict.repetitions + 1;
      SubTestResult r{3, hb.index, !far, static_cast<double>(hb.far_votes),
                      static_cast<double>(verdict.repetitions) / 2.0};
      all_accept &= r.accepted;
      verdict.subtests.push_back(r);
    }
  }

  verdict.decision = all_accept ? Decision::kClose : Decision::kFar;
  return verdict;
}

}  // namespace tolerant
