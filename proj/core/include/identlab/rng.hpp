#pragma once

#include <cstdint>
#include <random>

namespace identlab {

using Rng = std::mt19937_64;

// A counter-based stream key. Replicate i of an experiment draws from
// `stream.child(i).engine()`, so results do not depend on scheduling or on
// the number of worker threads.
class Stream {
 public:
  explicit Stream(std::uint64_t seed);

  // Independent sub-stream for a (tag, index) pair.
  Stream child(std::uint64_t index) const;
  Stream child(std::uint64_t tag, std::uint64_t index) const { return child(tag).child(index); }

  Rng engine() const { return Rng(key_); }
  std::uint64_t key() const noexcept { return key_; }

 private:
  struct RawKey {};
  Stream(RawKey, std::uint64_t key) : key_(key) {}

  std::uint64_t key_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Small helpers so every sampler draws variates the same way.
inline double draw_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }
inline double draw_uniform(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }
inline bool draw_bernoulli(Rng& rng, double p) { return draw_uniform(rng) < p; }

}  // namespace identlab
