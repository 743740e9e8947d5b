#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>

namespace emosid {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)) without leaving the log domain.
inline double log_add(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

/// log sum_i exp(x_i); returns kLogZero for an empty span.
inline double log_sum_exp(std::span<const double> xs) {
  double hi = kLogZero;
  for (double x : xs)
    if (x > hi) hi = x;
  if (hi == kLogZero) return kLogZero;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

/// splitmix64 step, used to derive independent seeds from one master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Mixes a master seed with record-key components so parallel and serial
/// generation draw from identical per-item streams.
template <typename... Parts>
std::uint64_t derive_seed(std::uint64_t master, Parts... parts) {
  std::uint64_t h = splitmix64(master);
  ((h = splitmix64(h ^ static_cast<std::uint64_t>(parts))), ...);
  return h;
}

/// FNV-1a over a byte string; used for config hashes in manifests.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace emosid
