#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

#include "evidisc/linalg.hpp"
#include "evidisc/matrix.hpp"

namespace evidisc {

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Splittable 64-bit generator (splitmix64 core). The (seed, stream) pair
/// fully determines the sample sequence, independent of platform and of any
/// other stream, which is what keeps parallel benchmark runs reproducible.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream) {
    state_ = detail::mix64(seed ^ 0x2545F4914F6CDD1DULL);
    state_ = detail::mix64(state_ ^ stream);
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return detail::mix64(state_);
  }

  /// Uniform on the open interval (0, 1).
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  /// Standard normal via Box-Muller (cosine branch; two uniforms per draw).
  double next_normal() {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  /// Uniform integer in [0, bound). 128-bit multiply keeps the mapping
  /// platform-independent.
  std::uint64_t next_below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

 private:
  std::uint64_t state_ = 0;
};

/// Hash-combine task coordinates into a stream id.
inline std::uint64_t derive_stream(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x243F6A8885A308D3ULL;
  for (std::uint64_t p : parts) h = detail::mix64(h ^ (p + 0x9E3779B97F4A7C15ULL));
  return h;
}

/// mean + L·u with u i.i.d. standard normal; L lower-triangular.
inline Vector sample_gaussian_vector(const Vector& mean, const Matrix& chol_lower,
                                     RngStream& rng) {
  const std::size_t d = mean.size();
  if (chol_lower.rows() != d || chol_lower.cols() != d)
    throw std::invalid_argument("sample_gaussian_vector: dimension mismatch");
  Vector u(d);
  for (std::size_t i = 0; i < d; ++i) u[i] = rng.next_normal();
  Vector x(mean);
  for (std::size_t i = 0; i < d; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j <= i; ++j) s += chol_lower(i, j) * u[j];
    x[i] += s;
  }
  return x;
}

}  // namespace evidisc
