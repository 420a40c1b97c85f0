#pragma once

#include <cstdint>
#include <numbers>

namespace gapmap {

// Tail sums of inverse powers, sum_{k >= from} k^{-p} for p = 2, 3.
//
// Both are computed as a direct partial sum up to a large cutoff M plus the
// midpoint of the integral bracket for the remainder:
//   sum_{k > M} k^{-3} in [1/(2(M+1)^2), 1/(2M^2)]
//   sum_{k > M} k^{-2} in [1/(M+1),      1/M]
// Summation runs smallest-term-first so the partial sum carries full double
// precision; the bracket midpoint leaves an error below 1e-15 relative.

inline constexpr std::int64_t kZetaCutoff = 1'000'000;

inline double inv_cube_tail(std::int64_t from, std::int64_t cutoff = kZetaCutoff) {
  if (from > cutoff) {
    // Integral bracket alone, midpoint of [1/(2 from^2), ...] shifted: use
    // the bracket for M = from - 1.
    const double lo = 1.0 / (2.0 * double(from) * double(from));
    const double hi = 1.0 / (2.0 * double(from - 1) * double(from - 1));
    return 0.5 * (lo + hi);
  }
  double sum = 0.0;
  for (std::int64_t k = cutoff; k >= from; --k) {
    const double kk = double(k);
    sum += 1.0 / (kk * kk * kk);
  }
  const double m1 = double(cutoff);
  const double lo = 1.0 / (2.0 * (m1 + 1.0) * (m1 + 1.0));
  const double hi = 1.0 / (2.0 * m1 * m1);
  return sum + 0.5 * (lo + hi);
}

inline double inv_square_tail(std::int64_t from, std::int64_t cutoff = kZetaCutoff) {
  if (from > cutoff) {
    const double lo = 1.0 / double(from);
    const double hi = 1.0 / double(from - 1);
    return 0.5 * (lo + hi);
  }
  double sum = 0.0;
  for (std::int64_t k = cutoff; k >= from; --k) {
    const double kk = double(k);
    sum += 1.0 / (kk * kk);
  }
  const double m1 = double(cutoff);
  return sum + 0.5 * (1.0 / (m1 + 1.0) + 1.0 / m1);
}

inline double partial_inv_cube(std::int64_t upto) {
  double sum = 0.0;
  for (std::int64_t k = upto; k >= 1; --k) {
    const double kk = double(k);
    sum += 1.0 / (kk * kk * kk);
  }
  return sum;
}

inline double partial_inv_square(std::int64_t upto) {
  double sum = 0.0;
  for (std::int64_t k = upto; k >= 1; --k) {
    const double kk = double(k);
    sum += 1.0 / (kk * kk);
  }
  return sum;
}

/// zeta(3), accurate to ~1e-16 relative; computed once and cached.
inline double zeta3() {
  static const double value = inv_cube_tail(1);
  return value;
}

/// zeta(2) = pi^2 / 6.
inline double zeta2() {
  constexpr double pi = std::numbers::pi;
  return pi * pi / 6.0;
}

}  // namespace gapmap
