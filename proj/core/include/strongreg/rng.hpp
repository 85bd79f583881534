#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace strongreg {

// Philox4x32-10 block; exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Counter-based stream: draw i of (seed, stream_id) is a pure function of
// (seed, stream_id, i), so streams can be created anywhere without coordination.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64();
  // uniform on [0, 1) with 53 random bits
  double uniform();
  // unbiased integer in [0, n)
  std::uint64_t uniform_index(std::uint64_t n);
  double normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  // number of 64-bit words consumed so far
  std::uint64_t position() const { return index_; }
  void seek(std::uint64_t index);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t index_ = 0;
  std::array<std::uint64_t, 2> block_{};
  std::uint64_t block_id_ = std::numeric_limits<std::uint64_t>::max();
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

// splitmix64-style mixing, used to derive per-trial seeds and stream ids
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace strongreg
