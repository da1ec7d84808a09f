#pragma once

#include <vector>

#include "tolerant/pmf.hpp"
#include "tolerant/rng.hpp"
#include "tolerant/tester.hpp"

namespace tolerant {

// Dyadic bucketing of a reference distribution: the low-mass set D (greedy
// smallest-weight symbols with total mass <= eps2/20) plus buckets
// D_j = { i outside D : q_i in (2^-j, 2^-j+1] } for j = 1..ell,
// ell = floor(log2(20 n / eps2)) + 1.
struct Bucketing {
  IndexList low_mass;              // D
  std::vector<IndexList> buckets;  // D_1 .. D_ell
  int ell = 0;
  double eps2 = 0.0;
  double low_mass_total = 0.0;       // q(D)
  std::vector<double> bucket_mass;   // q(D_j)
};

Bucketing build_bucketing(const Pmf& q, double eps2);

// Quasinorms and support size of q after truncating alpha mass; these drive
// the instance-optimal sample complexity.
struct EffectiveSupportStats {
  double quasinorm_two_thirds = 0.0;
  double quasinorm_half = 0.0;
  Eigen::Index support = 0;
};

EffectiveSupportStats effective_support_stats(const Pmf& q, double alpha);

// Conditional distribution of q on a subset with positive mass.
Pmf conditional_pmf(const Pmf& q, const IndexList& subset);

// Partition of a subset S into blocks of mass >= mas(q,S) each (a trailing
// remainder with mass < mas merges into the final block). The first rat(q,S)
// blocks carry the planted uniform instance.
struct EmbeddingSpec {
  IndexList subset;  // S
  double mas = 0.0;
  double subset_mass = 0.0;  // q(S)
  std::int64_t rat = 0;      // floor(q(S) / (2 mas))
  std::vector<IndexList> blocks;
  std::vector<double> block_mass;
};

EmbeddingSpec build_embedding(const Pmf& q, const IndexList& subset);

// Plants a distribution p_small over [rat] inside q:
//   p_new_i = q_i + q_i (q(S) / (4 q(S_j))) (p_small_j - 1/rat)  for i in S_j,
// j <= rat; all other symbols keep q_i. Exactly satisfies
//   ||p_new - q||_1 = (q(S)/4) ||p_small - Unif_rat||_1.
Pmf embed_uniform_instance(const Pmf& q, const EmbeddingSpec& spec,
                           const Pmf& p_small);
Pmf embed_uniform_instance(const Pmf& q, const IndexList& subset,
                           const Pmf& p_small);

struct SubTestResult {
  int kind = 0;     // 1 = low-mass test, 2 = bucket-mass test, 3 = conditional test
  int bucket = -1;  // 0-based bucket index, -1 for kind 1
  bool accepted = true;
  double statistic = 0.0;  // mass estimate (kinds 1-2) or majority margin (kind 3)
  double threshold = 0.0;
};

struct IoVerdict {
  Decision decision = Decision::kClose;
  int ell = 0;
  double mass_batch_size = 0.0;  // fixed-budget draws used for sub-tests (1)/(2)
  double core_budget = 0.0;      // Poisson rate per core batch for sub-tests (3)
  int repetitions = 0;           // per-bucket majority count for sub-tests (3)
  std::vector<SubTestResult> subtests;
};

// Sample budgets the bucketed tester will use, computable without sampling.
struct IoBudget {
  int ell = 0;
  double mass_batch = 0.0;   // one batch for sub-tests (1)/(2)
  double core_budget = 0.0;  // Poisson rate of each shared p-batch
  int repetitions = 0;       // majority count per heavy bucket
  // total expected draws from p across all sub-tests
  double total() const { return mass_batch + 2.0 * repetitions * core_budget; }
};

IoBudget io_budget_plan(const Pmf& q, double eps2);

// Bucketed tolerant identity tester: at most 2 ell + 1 sub-tests, each driven
// to failure probability <= 1/(5(2 ell + 1)); accepts iff all accept.
// Requires eps1 <= eps2 / (40 ell).
IoVerdict io_test_identity(const Pmf& q, const PoissonSampler& p_source,
                           double eps1, double eps2, double c, RngStream& rng);

}  // namespace tolerant
