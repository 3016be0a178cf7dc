#include "identlab/rng.hpp"

namespace identlab {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Stream::Stream(std::uint64_t seed) : key_(splitmix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

Stream Stream::child(std::uint64_t index) const {
  return Stream(RawKey{}, splitmix64(key_ ^ splitmix64(index + 0x3c6ef372fe94f82bULL)));
}

}  // namespace identlab
