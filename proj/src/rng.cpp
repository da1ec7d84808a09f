#include "tolerant/rng.hpp"

#include <random>
#include <stdexcept>

namespace tolerant {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr unsigned __int128 pcg_multiplier() {
  return (static_cast<unsigned __int128>(2549297995355413924ULL) << 64) |
         4865540595714422341ULL;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  const std::uint64_t hi = splitmix64(stream_id ^ 0xda3e39cb94b95bdbULL);
  const std::uint64_t lo = splitmix64(stream_id + 0x853c49e6748fea9bULL);
  inc_ = (((static_cast<u128>(hi) << 64) | lo) << 1) | 1u;

  const std::uint64_t s_hi = splitmix64(seed);
  const std::uint64_t s_lo = splitmix64(seed ^ 0xd1b54a32d192ed03ULL);
  state_ = 0;
  state_ = state_ * pcg_multiplier() + inc_;
  state_ += (static_cast<u128>(s_hi) << 64) | s_lo;
  state_ = state_ * pcg_multiplier() + inc_;
}

RngStream::result_type RngStream::operator()() {
  state_ = state_ * pcg_multiplier() + inc_;
  const std::uint64_t xored =
      static_cast<std::uint64_t>(state_ >> 64) ^ static_cast<std::uint64_t>(state_);
  const unsigned rot = static_cast<unsigned>(state_ >> 122);
  return (xored >> rot) | (xored << ((64 - rot) & 63));
}

double RngStream::uniform() {
  // 53 random bits into [0, 1).
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_int(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_int: bound must be positive");
  // Rejection to remove modulo bias.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = (*this)();
    if (r >= threshold) return r % bound;
  }
}

std::int64_t RngStream::poisson(double mean) {
  if (mean < 0) throw std::invalid_argument("poisson: mean must be nonnegative");
  if (mean == 0) return 0;
  std::poisson_distribution<std::int64_t> dist(mean);
  return dist(*this);
}

std::int64_t RngStream::binomial(std::int64_t trials, double prob) {
  if (trials < 0) throw std::invalid_argument("binomial: trials must be nonnegative");
  if (prob < 0 || prob > 1) throw std::invalid_argument("binomial: prob must be in [0,1]");
  if (trials == 0 || prob == 0) return 0;
  if (prob == 1) return trials;
  std::binomial_distribution<std::int64_t> dist(trials, prob);
  return dist(*this);
}

RngStream RngStream::substream(std::uint64_t child_id) const {
  const std::uint64_t mixed =
      splitmix64(stream_id_ ^ splitmix64(child_id + 0x2545f4914f6cdd1dULL));
  return RngStream(seed_, mixed);
}

}  // namespace tolerant
