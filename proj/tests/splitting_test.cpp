#include <doctest.h>

#include <cmath>

#include "tolerant/pmf.hpp"
#include "tolerant/rng.hpp"
#include "tolerant/splitting.hpp"

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

}  // namespace

TEST_CASE("split map construction") {
  const Pmf q(vec({0.5, 0.25, 0.125, 0.125}));
  const SplitMap map = build_split_map(q);
  CHECK(map.block_sizes[0] == 3);
  CHECK(map.block_sizes[1] == 2);
  CHECK(map.block_sizes[2] == 1);
  CHECK(map.block_sizes[3] == 1);
  CHECK(map.new_domain_size() == 7);

  const SplitMap uni = build_split_map(make_uniform(9));
  for (Eigen::Index i = 0; i < 9; ++i) CHECK(uni.block_sizes[i] == 2);
  CHECK(uni.new_domain_size() == 18);

  Vector point = Vector::Zero(6);
  point[0] = 1.0;
  const SplitMap pm = build_split_map(Pmf(point));
  CHECK(pm.block_sizes[0] == 7);
  for (Eigen::Index i = 1; i < 6; ++i) CHECK(pm.block_sizes[i] == 1);
}

TEST_CASE("split pmf expands blocks evenly") {
  const Pmf q(vec({0.5, 0.25, 0.125, 0.125}));
  const SplitMap map = build_split_map(q);
  const Pmf qs = split_pmf(q, map);
  REQUIRE(qs.size() == 7);
  for (int i = 0; i < 3; ++i) CHECK(qs[i] == doctest::Approx(1.0 / 6).epsilon(1e-15));
  for (int i = 3; i < 5; ++i) CHECK(qs[i] == doctest::Approx(0.125).epsilon(1e-15));
  for (int i = 5; i < 7; ++i) CHECK(qs[i] == doctest::Approx(0.125).epsilon(1e-15));

  CHECK_THROWS_AS(split_pmf(make_uniform(3), map), std::invalid_argument);
}

TEST_CASE("splitting invariants over random references") {
  RngStream rng(2024, 0);
  for (int it = 0; it < 60; ++it) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.uniform_int(120));
    const Pmf q = random_pmf(n, rng);
    const SplitMap map = build_split_map(q);

    // new domain at most doubles
    CHECK(map.new_domain_size() <= 2 * n);

    // l1 distances preserved exactly
    const Pmf p = random_pmf(n, rng);
    const Pmf p2 = random_pmf(n, rng);
    const double before = l1_distance(p, p2);
    const double after = l1_distance(split_pmf(p, map), split_pmf(p2, map));
    CHECK(std::abs(before - after) <= 1e-12);

    // split reference has flattened l2 norm
    const Pmf qs = split_pmf(q, map);
    const double l2sq = qs.weights().squaredNorm();
    CHECK(l2sq <= 1.0 / static_cast<double>(n) + 1e-12);
    CHECK(l2_norm(qs) <=
          std::sqrt(2.0 / static_cast<double>(map.new_domain_size())) + 1e-12);
  }
}

TEST_CASE("split histogram: identity map passes counts through") {
  SplitMap unit;
  unit.block_sizes = CountVector::Ones(4);
  unit.offsets.resize(5);
  for (int i = 0; i <= 4; ++i) unit.offsets[i] = i;

  Histogram h;
  h.budget_m = 10.0;
  h.counts.resize(4);
  h.counts << 3, 0, 5, 2;
  RngStream rng(8, 0);
  const Histogram out = split_histogram(h, unit, rng);
  CHECK(out.counts == h.counts);
}

TEST_CASE("split histogram: totals preserved, blocks uniform") {
  const Pmf q(vec({0.5, 0.25, 0.125, 0.125}));
  const SplitMap map = build_split_map(q);
  RngStream rng(77, 0);

  Histogram h;
  h.budget_m = 12.0;
  h.counts.resize(4);
  h.counts << 7, 4, 2, 1;
  for (int it = 0; it < 100; ++it) {
    const Histogram out = split_histogram(h, map, rng);
    CHECK(out.total() == h.total());
  }

  // All mass on symbol 0 (block size 3): cell assignment is uniform.
  Histogram point;
  point.budget_m = 1.0;
  point.counts = CountVector::Zero(4);
  const int reps = 30000;
  Vector cell = Vector::Zero(3);
  for (int r = 0; r < reps; ++r) {
    point.counts[0] = 1;
    const Histogram out = split_histogram(point, map, rng);
    for (int j = 0; j < 3; ++j)
      cell[j] += static_cast<double>(out.counts[j]);
  }
  const double se = std::sqrt((1.0 / 3) * (2.0 / 3) * reps);
  for (int j = 0; j < 3; ++j)
    CHECK(std::abs(cell[j] - reps / 3.0) <= 4.5 * se);
}
