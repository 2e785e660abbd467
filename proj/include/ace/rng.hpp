#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ace {

// Stream splitting: each logical stream (rollout index, generator instance)
// gets its own mt19937_64 seeded through splitmix64 so that streams are
// decorrelated and reproducible independently of how many streams ran before.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 make_stream(uint64_t seed, uint64_t stream) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(stream)));
}

// Canonical uniform in [0,1) with 53 random bits; used for every CDF walk so
// rollouts are bit-deterministic across platforms.
inline double canonical(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Walks a CDF over weights (not necessarily normalized); returns the index of
// the first prefix exceeding u * total. Deterministic given identical weights.
inline size_t sample_index(std::mt19937_64& g, const std::vector<double>& w) {
  double total = 0;
  for (double x : w) total += x;
  double u = canonical(g) * total;
  double acc = 0;
  for (size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    if (u < acc) return i;
  }
  return w.empty() ? 0 : w.size() - 1;
}

}  // namespace ace
