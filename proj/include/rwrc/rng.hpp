#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace rwrc::rng {

// SplitMix64 finalizer. Used as a stateless hash: every random quantity in
// the library is a pure function of (seed, stream, counter), so ensembles
// can be evaluated in any order or in parallel without shared state.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t mix(std::uint64_t seed, std::uint64_t k1,
                                   std::uint64_t k2 = 0, std::uint64_t k3 = 0) {
  std::uint64_t h = splitmix64(seed ^ 0x8f1bbcdcbfa53e0bULL);
  h = splitmix64(h + 0x9e3779b97f4a7c15ULL * (k1 + 1));
  h = splitmix64(h ^ (k2 + 0xd1342543de82ef95ULL));
  h = splitmix64(h + k3);
  return h;
}

// Uniform in the open interval (0,1); never returns 0 or 1, so logs are safe.
inline double u01(std::uint64_t h) {
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

inline double exponential(std::uint64_t h) { return -std::log(u01(h)); }

// Sequential stream for a single walk / restart: deterministic given
// (seed, stream id), draws indexed by an internal counter.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64() { return mix(seed_, stream_, counter_++); }
  double next_u01() { return u01(next_u64()); }
  double next_exponential() { return -std::log(next_u01()); }
  // standard normal via Box-Muller (one value per call, second discarded)
  double next_normal() {
    const double u = next_u01();
    const double v = next_u01();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925287 * v);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

// Stable 64-bit key for a lattice edge (z, z+e_dir), independent of any box,
// so the same seed reproduces the same environment on Z^d at every scale.
inline std::uint64_t edge_key(std::span<const std::int64_t> z, int dir) {
  std::uint64_t h = 0x2545f4914f6cdd1dULL;
  for (const std::int64_t c : z)
    h = splitmix64(h ^ static_cast<std::uint64_t>(c) * 0xff51afd7ed558ccdULL);
  return splitmix64(h + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(dir + 1));
}

}  // namespace rwrc::rng
