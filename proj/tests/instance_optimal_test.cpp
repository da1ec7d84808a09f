#include <doctest.h>

#include <cmath>
#include <numeric>

#include "tolerant/instance_optimal.hpp"
#include "tolerant/pmf.hpp"
#include "tolerant/rng.hpp"

using namespace tolerant;

namespace {

Vector vec(std::initializer_list<double> vals) {
  Vector v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

Pmf random_pmf(Eigen::Index n, RngStream& rng) {
  Vector w(n);
  for (Eigen::Index i = 0; i < n; ++i) w[i] = -std::log(1.0 - rng.uniform());
  return Pmf::normalized(std::move(w));
}

IndexList full_domain(const Pmf& q) {
  IndexList all(q.size());
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  return all;
}

}  // namespace

TEST_CASE("bucketing of the uniform reference") {
  // Unif_4 at eps2 = 1: the low-mass budget 1/20 holds nothing, and weight
  // 1/4 sits in the dyadic interval (1/8, 1/4], bucket j = 3.
  const Bucketing b = build_bucketing(make_uniform(4), 1.0);
  CHECK(b.low_mass.empty());
  CHECK(b.ell == static_cast<int>(std::floor(std::log2(80.0))) + 1);
  CHECK(b.buckets[2].size() == 4);
  CHECK(b.bucket_mass[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bucket count formula") {
  const Bucketing b = build_bucketing(make_uniform(1000), 0.1);
  CHECK(b.ell == 18);  // floor(log2(200000)) + 1
}

TEST_CASE("zero-weight symbols land in the low-mass set") {
  const Pmf q(vec({0.5, 0.5, 0.0, 0.0}));
  const Bucketing b = build_bucketing(q, 0.4);
  CHECK(b.low_mass.size() == 2);
  CHECK(b.low_mass[0] == 2);
  CHECK(b.low_mass[1] == 3);
}

TEST_CASE("bucketing partitions the support dyadically") {
  RngStream rng(808, 0);
  for (int it = 0; it < 25; ++it) {
    const Eigen::Index n = 5 + static_cast<Eigen::Index>(rng.uniform_int(200));
    const Pmf q = random_pmf(n, rng);
    const double eps2 = 0.05 + 0.9 * rng.uniform();
    const Bucketing b = build_bucketing(q, eps2);

    std::vector<int> seen(n, 0);
    for (auto i : b.low_mass) seen[i]++;
    double min_outside = 2.0;
    for (int j = 0; j < b.ell; ++j) {
      for (auto i : b.buckets[j]) {
        seen[i]++;
        // dyadic interval (2^-j, 2^-j+1]
        CHECK(q[i] > std::ldexp(1.0, -(j + 1)));
        CHECK(q[i] <= std::ldexp(1.0, -j));
        min_outside = std::min(min_outside, q[i]);
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) CHECK(seen[i] == 1);
    CHECK(b.low_mass_total <= eps2 / 20.0 + 1e-12);
    if (min_outside < 2.0)
      CHECK(min_outside > eps2 / (20.0 * static_cast<double>(n)));
  }
}

TEST_CASE("effective support statistics") {
  const auto uni = effective_support_stats(make_uniform(16), 1e-9);
  CHECK(uni.quasinorm_two_thirds == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(uni.quasinorm_half == doctest::Approx(16.0).epsilon(1e-10));
  CHECK(uni.support == 16);

  const Pmf q(vec({0.5, 0.3, 0.1, 0.1}));
  const auto s = effective_support_stats(q, 0.25);
  CHECK(s.support == 2);
  CHECK(s.quasinorm_half ==
        doctest::Approx(quasinorm(vec({0.5, 0.3}), 0.5)).epsilon(1e-12));
  CHECK(s.quasinorm_two_thirds ==
        doctest::Approx(quasinorm(vec({0.5, 0.3}), 2.0 / 3.0)).epsilon(1e-12));

  const auto whole = effective_support_stats(q, 0.0);
  CHECK(whole.support == 4);
}

TEST_CASE("conditional pmf") {
  const Pmf q(vec({0.5, 0.3, 0.2}));
  const Pmf whole = conditional_pmf(q, {0, 1, 2});
  CHECK(l1_distance(whole, q) <= 1e-15);

  const Pmf sub = conditional_pmf(q, {1, 2});
  CHECK(sub[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(sub[1] == doctest::Approx(0.4).epsilon(1e-12));

  const Pmf single = conditional_pmf(q, {2});
  CHECK(single[0] == 1.0);

  const Pmf with_zero(vec({0.5, 0.5, 0.0}));
  CHECK_THROWS_AS(conditional_pmf(with_zero, {2}), std::invalid_argument);
}

TEST_CASE("embedding: worked example on Unif_4") {
  const Pmf q = make_uniform(4);
  const EmbeddingSpec spec = build_embedding(q, full_domain(q));
  CHECK(spec.mas == 0.25);
  CHECK(spec.rat == 2);
  CHECK(spec.blocks.size() == 4);

  const Pmf planted = embed_uniform_instance(q, spec, Pmf(vec({1.0, 0.0})));
  CHECK(planted[0] == doctest::Approx(0.375).epsilon(1e-14));
  CHECK(planted[1] == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(planted[2] == 0.25);
  CHECK(planted[3] == 0.25);
  CHECK(l1_distance(planted, q) == doctest::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("embedding: uniform plant is a no-op") {
  RngStream rng(2121, 0);
  const Pmf q = random_pmf(40, rng);
  const EmbeddingSpec spec = build_embedding(q, full_domain(q));
  const Pmf planted = embed_uniform_instance(q, spec, make_uniform(spec.rat));
  CHECK(l1_distance(planted, q) <= 1e-12);
}

TEST_CASE("embedding satisfies the exact l1 identity") {
  RngStream rng(343434, 0);
  for (int it = 0; it < 40; ++it) {
    const Eigen::Index n = 6 + static_cast<Eigen::Index>(rng.uniform_int(120));
    const Pmf q = random_pmf(n, rng);

    // random contiguous-ish subset covering at least half the symbols
    IndexList subset;
    for (Eigen::Index i = 0; i < n; ++i)
      if (rng.uniform() < 0.7) subset.push_back(i);
    if (subset.size() < 2) subset = full_domain(q);

    EmbeddingSpec spec;
    try {
      spec = build_embedding(q, subset);
    } catch (const std::invalid_argument&) {
      continue;  // rat < 1 subsets are rejected by contract
    }
    const Pmf p_small = random_pmf(spec.rat, rng);
    const Pmf planted = embed_uniform_instance(q, spec, p_small);

    CHECK((planted.weights().array() >= 0).all());
    const double lhs = l1_distance(planted, q);
    const double rhs = spec.subset_mass / 4.0 *
                       l1_distance(p_small, make_uniform(spec.rat));
    CHECK(std::abs(lhs - rhs) <= 1e-12);

    // blocks used by the plant respect the mass lower bound
    for (std::int64_t j = 0; j < spec.rat; ++j)
      CHECK(spec.block_mass[static_cast<std::size_t>(j)] >= spec.mas - 1e-12);
  }
}

TEST_CASE("claim-style soundness of the bucket conditions") {
  // If ||p - q||_1 <= eps1 then exactly: p(D) <= eps1 + eps2/20,
  // |p(D_j) - q(D_j)| <= eps1, and ||p^j - q^j||_1 <= 2 eps1 / q(D_j).
  RngStream rng(51515, 0);
  for (int it = 0; it < 25; ++it) {
    const Eigen::Index n = 10 + static_cast<Eigen::Index>(rng.uniform_int(100));
    const Pmf q = random_pmf(n, rng);
    const double eps2 = 0.3 + 0.5 * rng.uniform();
    const Bucketing b = build_bucketing(q, eps2);
    const double eps1 = eps2 / (40.0 * b.ell);

    // close perturbation at l1 distance strictly below eps1
    Vector w = q.weights();
    for (Eigen::Index i = 0; 2 * i + 1 < n; ++i) {
      const double d =
          std::min({0.45 * eps1 / static_cast<double>(n), w[2 * i + 1]});
      w[2 * i] += d;
      w[2 * i + 1] -= d;
    }
    const Pmf p = Pmf::normalized(w);
    const double dist = l1_distance(p, q);
    REQUIRE(dist <= eps1);

    double p_low = 0.0;
    for (auto i : b.low_mass) p_low += p[i];
    CHECK(p_low <= eps1 + eps2 / 20.0 + 1e-12);
    for (int j = 0; j < b.ell; ++j) {
      if (b.buckets[j].empty()) continue;
      double pj = 0.0;
      for (auto i : b.buckets[j]) pj += p[i];
      CHECK(std::abs(pj - b.bucket_mass[j]) <= eps1 + 1e-12);
      if (pj > 0) {
        const Pmf pc = conditional_pmf(p, b.buckets[j]);
        const Pmf qc = conditional_pmf(q, b.buckets[j]);
        CHECK(l1_distance(pc, qc) <= 2.0 * eps1 / b.bucket_mass[j] + 1e-12);
      }
    }
  }
}

TEST_CASE("claim-style completeness of the bucket conditions") {
  // If p(D) <= eps2/5, |p(D_j) - q(D_j)| <= eps2/(10 ell), and heavy buckets
  // have conditional distance <= eps2/(5 ell q(D_j)), then ||p-q||_1 <= eps2.
  RngStream rng(626262, 0);
  for (int it = 0; it < 25; ++it) {
    const Eigen::Index n = 10 + static_cast<Eigen::Index>(rng.uniform_int(80));
    const Pmf q = random_pmf(n, rng);
    const double eps2 = 0.3 + 0.5 * rng.uniform();
    const Bucketing b = build_bucketing(q, eps2);
    const double ell = static_cast<double>(b.ell);

    // Build p violating nothing: keep bucket masses exact and perturb inside
    // heavy buckets up to their allowance.
    Vector w = q.weights();
    for (int j = 0; j < b.ell; ++j) {
      const auto& bucket = b.buckets[j];
      if (bucket.size() < 2) continue;
      if (b.bucket_mass[j] < eps2 / (5.0 * ell)) continue;
      const double allowance = eps2 / (5.0 * ell);  // q(D_j) * conditional cap
      double budget = 0.45 * allowance;
      for (std::size_t k = 0; 2 * k + 1 < bucket.size() && budget > 0; ++k) {
        const double d = std::min(budget, 0.5 * w[bucket[2 * k + 1]]);
        w[bucket[2 * k]] += d;
        w[bucket[2 * k + 1]] -= d;
        budget -= d;
      }
    }
    const Pmf p = Pmf::normalized(w);

    // verify the premises, then the conclusion
    double p_low = 0.0;
    for (auto i : b.low_mass) p_low += p[i];
    REQUIRE(p_low <= eps2 / 5.0 + 1e-12);
    for (int j = 0; j < b.ell; ++j) {
      if (b.buckets[j].empty()) continue;
      double pj = 0.0;
      for (auto i : b.buckets[j]) pj += p[i];
      REQUIRE(std::abs(pj - b.bucket_mass[j]) <= eps2 / (10.0 * ell) + 1e-12);
      if (b.bucket_mass[j] >= eps2 / (5.0 * ell) && pj > 0) {
        const Pmf pc = conditional_pmf(p, b.buckets[j]);
        const Pmf qc = conditional_pmf(q, b.buckets[j]);
        REQUIRE(l1_distance(pc, qc) <=
                eps2 / (5.0 * ell * b.bucket_mass[j]) + 1e-12);
      }
    }
    CHECK(l1_distance(p, q) <= eps2);
  }
}

TEST_CASE("io tester rejects an unsupported tolerance") {
  const Pmf q = make_zipf(64, 1.0);
  RngStream rng(1, 0);
  CHECK_THROWS_AS(
      io_test_identity(q, pmf_sampler(q), 0.4, 0.5, 1.0, rng),
      std::invalid_argument);
}

TEST_CASE("io tester structural accounting") {
  const Pmf q = make_zipf(64, 1.0);
  RngStream rng(2, 0);
  const IoVerdict v = io_test_identity(q, pmf_sampler(q), 0.0, 0.5, 0.4, rng);
  CHECK(v.subtests.size() <= 2 * static_cast<std::size_t>(v.ell) + 1);
  CHECK(v.repetitions % 2 == 1);
  // enough repetitions to drive per-test failure under 1/(5(2 ell + 1))
  const double kl = 0.5 * std::log(0.5 / 0.2) + 0.5 * std::log(0.5 / 0.8);
  CHECK(std::exp(-kl * v.repetitions) <= 1.0 / (5.0 * (2.0 * v.ell + 1.0)));
}

TEST_CASE("io tester smoke: matched and planted instances") {
  const Pmf q = make_zipf(64, 1.0);
  RngStream rng(3, 0);

  int close_ok = 0;
  for (int t = 0; t < 10; ++t) {
    RngStream tr = rng.substream(t);
    const IoVerdict v = io_test_identity(q, pmf_sampler(q), 0.0, 0.5, 0.4, tr);
    close_ok += v.decision == Decision::kClose;
  }
  CHECK(close_ok >= 8);

  // far instance: pairwise transfer inside every heavy bucket
  const Bucketing b = build_bucketing(q, 0.5);
  Vector w = q.weights();
  double moved = 0.0;
  for (int j = 0; j < b.ell; ++j) {
    const auto& bucket = b.buckets[j];
    for (std::size_t k = 0; 2 * k + 1 < bucket.size(); ++k) {
      const double d = 0.8 * std::min(w[bucket[2 * k]], w[bucket[2 * k + 1]]);
      w[bucket[2 * k]] += d;
      w[bucket[2 * k + 1]] -= d;
      moved += 2 * d;
    }
  }
  const Pmf far = Pmf::normalized(w);
  REQUIRE(l1_distance(far, q) >= 0.5);

  int far_ok = 0;
  for (int t = 0; t < 10; ++t) {
    RngStream tr = rng.substream(1000 + t);
    const IoVerdict v = io_test_identity(q, pmf_sampler(far), 0.0, 0.5, 0.4, tr);
    far_ok += v.decision == Decision::kFar;
  }
  CHECK(far_ok >= 8);
}

TEST_CASE("io budgets scale polylogarithmically against the plain tester") {
  // For uniform references the bucketed tester should cost at most polylog
  // factors over the plain corner budget 8 sqrt(n) / eps2^2; check the growth
  // of the overhead ratio between two domain sizes against the ell^4 trend
  // (ell^2 from the conditional tolerances, the rest from amplification).
  const double eps2 = 0.5;
  auto overhead = [&](Eigen::Index n) {
    const IoBudget plan = io_budget_plan(make_uniform(n), eps2);
    const double plain = 8.0 * std::sqrt(static_cast<double>(n)) / (eps2 * eps2);
    return std::pair<double, double>(plan.total() / plain,
                                     static_cast<double>(plan.ell));
  };
  const auto [r256, ell256] = overhead(256);
  const auto [r1024, ell1024] = overhead(1024);
  const double trend = std::pow(ell1024 / ell256, 4.0);
  CHECK(r1024 <= r256 * trend * 2.0);
  CHECK(r1024 >= r256 / 2.0);  // and it does not collapse either
}
