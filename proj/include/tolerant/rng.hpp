#pragma once

#include <cstdint>

namespace tolerant {

// Seedable random stream with explicit stream ids (PCG XSL-RR 128/64).
// Identical (seed, stream_id) pairs replay identical draws; distinct stream
// ids select distinct increments of the underlying LCG, so streams created
// for parallel trials are independent of scheduling order.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()();

  // Uniform double in [0, 1).
  double uniform();

  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t uniform_int(std::uint64_t bound);

  // Poisson draw; mean may be zero (returns 0) or large.
  std::int64_t poisson(double mean);

  // Binomial draw over `trials` attempts with success probability `prob`.
  std::int64_t binomial(std::int64_t trials, double prob);

  // Deterministic child stream; distinct child ids give independent streams.
  RngStream substream(std::uint64_t child_id) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  using u128 = unsigned __int128;

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  u128 state_;
  u128 inc_;
};

}  // namespace tolerant
