#pragma once

#include <cstdint>

namespace gbmc {

// Counter-based stream: draw k of stream (seed, stream) is a pure function of
// (seed, stream, k), so any (seed, stream, counter) triple reproduces the same
// values bit for bit on any platform.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t counter() const { return counter_; }

  // Repositions the stream; discards any cached normal deviate.
  void set_counter(std::uint64_t counter);

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1).
  double uniform();
  double normal();

  // Independent child stream derived from this stream's key.
  RngStream substream(std::uint64_t index) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace gbmc
