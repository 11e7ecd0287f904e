#include "gbmc/rng.hpp"

#include <cmath>
#include <numbers>

namespace gbmc {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), key_(mix64(mix64(seed + kGolden) ^ mix64(stream * kGolden + 1))) {}

void RngStream::set_counter(std::uint64_t counter) {
  counter_ = counter;
  has_spare_ = false;
}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return mix64(mix64(key_ + counter_ * kGolden) ^ key_);
}

double RngStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

// Box-Muller, both deviates used.
double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

RngStream RngStream::substream(std::uint64_t index) const {
  return RngStream(key_, mix64(stream_ + kGolden * (index + 1)));
}

}  // namespace gbmc
