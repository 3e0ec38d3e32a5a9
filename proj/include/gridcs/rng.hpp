#pragma once

// Seedable random streams with cheap, independent substreams.
//
// A stream is addressed by a root seed plus a path of integers (for example
// {scenario, replication, draw}). The path is folded through SplitMix64 into
// the 256-bit state of a xoshiro256** generator, so any substream can be
// reconstructed directly without advancing the others. Results therefore do
// not depend on how work is split between threads.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace gridcs {

inline std::uint64_t splitmix64(std::uint64_t &state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256** (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed = 0) {
    std::uint64_t sm = seed;
    for (auto &word : s_) word = splitmix64(sm);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_{};
};

/// Derive the seed of the substream identified by `path` under `root`.
inline std::uint64_t substream_seed(std::uint64_t root,
                                    std::initializer_list<std::uint64_t> path) {
  std::uint64_t state = root;
  std::uint64_t h = splitmix64(state);
  for (std::uint64_t p : path) {
    state = h ^ (p + 0x632be59bd9b4e019ULL);
    h = splitmix64(state);
  }
  return h;
}

/// A generator bundled with the two distributions the library draws from.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t root, std::initializer_list<std::uint64_t> path)
      : engine_(substream_seed(root, path)) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

  template <class OutputIt>
  void fill_normal(OutputIt first, OutputIt last) {
    for (; first != last; ++first) *first = normal_(engine_);
  }

  Xoshiro256 &engine() { return engine_; }

 private:
  Xoshiro256 engine_;
  boost::random::normal_distribution<double> normal_{};
  boost::random::uniform_01<double> uniform_{};
};

// Stream tags, so that different consumers of one root seed never collide.
namespace stream_tag {
inline constexpr std::uint64_t boundary_draw = 1;
inline constexpr std::uint64_t chernoff_draw = 2;
inline constexpr std::uint64_t dataset = 3;
inline constexpr std::uint64_t inner_mc = 4;
inline constexpr std::uint64_t oracle_table = 5;
}  // namespace stream_tag

}  // namespace gridcs
