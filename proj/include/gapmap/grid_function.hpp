#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace gapmap {

/// A real function on [0,1] sampled at x_i = i/m, i = 0..m, evaluated
/// between grid points by linear interpolation.  The interpolant is the
/// canonical continuous representative: the discrete norm estimators below
/// are exact for it, which is what makes norm inequalities assertable.
struct GridFunction {
  std::size_t m = 0;
  std::vector<double> values;  // m + 1 entries

  GridFunction() = default;
  GridFunction(std::size_t m_, std::vector<double> v) : m(m_), values(std::move(v)) {
    assert(values.size() == m + 1);
  }

  static GridFunction constant(std::size_t m, double value) {
    return GridFunction(m, std::vector<double>(m + 1, value));
  }

  template <class Fn>
  static GridFunction from_samples(std::size_t m, Fn&& fn) {
    std::vector<double> v(m + 1);
    const double inv_m = 1.0 / double(m);
    for (std::size_t i = 0; i <= m; ++i) v[i] = fn(double(i) * inv_m);
    return GridFunction(m, std::move(v));
  }

  /// 0/1 indicator of [a, b] with both jumps snapped to the nearest grid
  /// point; the grid sequence then has variation exactly 2 when the
  /// interval is interior.
  static GridFunction indicator(std::size_t m, double a, double b) {
    std::vector<double> v(m + 1, 0.0);
    const auto ia = std::int64_t(std::llround(a * double(m)));
    const auto ib = std::int64_t(std::llround(b * double(m)));
    for (std::int64_t i = std::max<std::int64_t>(ia, 0);
         i <= std::min<std::int64_t>(ib, std::int64_t(m)); ++i)
      v[std::size_t(i)] = 1.0;
    return GridFunction(m, std::move(v));
  }

  double eval(double x) const {
    const double t = x * double(m);
    if (t <= 0.0) return values.front();
    if (t >= double(m)) return values.back();
    std::size_t i = std::size_t(t);
    if (i >= m) i = m - 1;
    const double frac = t - double(i);
    return values[i] + frac * (values[i + 1] - values[i]);
  }

  void scale(double s) {
    for (double& v : values) v *= s;
  }

  void shift(double s) {
    for (double& v : values) v += s;
  }

  void add_scaled(const GridFunction& g, double s) {
    assert(g.m == m);
    for (std::size_t i = 0; i <= m; ++i) values[i] += s * g.values[i];
  }
};

inline double sup_norm(const GridFunction& f) {
  double best = 0.0;
  for (double v : f.values) best = std::max(best, std::abs(v));
  return best;
}

/// Exact Lipschitz constant of the interpolant: the steepest grid slope.
inline double lip_seminorm(const GridFunction& f) {
  double best = 0.0;
  for (std::size_t i = 0; i < f.m; ++i)
    best = std::max(best, std::abs(f.values[i + 1] - f.values[i]));
  return best * double(f.m);
}

inline double lip_norm(const GridFunction& f) {
  return sup_norm(f) + lip_seminorm(f);
}

/// Total variation of the grid sequence; equals the variation of the
/// interpolant and lower-bounds the variation of anything agreeing at the
/// grid points.
inline double variation(const GridFunction& f) {
  double sum = 0.0;
  for (std::size_t i = 0; i < f.m; ++i)
    sum += std::abs(f.values[i + 1] - f.values[i]);
  return sum;
}

/// Trapezoid rule.  Order 2 is enough: everything downstream is only
/// Lipschitz, so higher-order schemes buy nothing.
inline double integral(const GridFunction& f) {
  double sum = 0.5 * (f.values.front() + f.values.back());
  for (std::size_t i = 1; i < f.m; ++i) sum += f.values[i];
  return sum / double(f.m);
}

inline double integral_product(const GridFunction& f, const GridFunction& g) {
  assert(f.m == g.m);
  double sum = 0.5 * (f.values.front() * g.values.front() +
                      f.values.back() * g.values.back());
  for (std::size_t i = 1; i < f.m; ++i) sum += f.values[i] * g.values[i];
  return sum / double(f.m);
}

/// Random truncated Fourier series sum_{k<=modes} a_k cos(2 pi k x)
/// + b_k sin(2 pi k x), rescaled so the grid Lipschitz seminorm equals K
/// exactly.  Deterministic in (seed, K, modes).
inline GridFunction random_lipschitz(std::size_t m, std::uint64_t seed, double K,
                                     int modes) {
  if (modes < 1) throw std::invalid_argument("random_lipschitz: modes must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::vector<double> ca(static_cast<std::size_t>(modes));
  std::vector<double> cb(static_cast<std::size_t>(modes));
  for (int k = 0; k < modes; ++k) {
    ca[std::size_t(k)] = coeff(rng);
    cb[std::size_t(k)] = coeff(rng);
  }
  constexpr double two_pi = 2.0 * std::numbers::pi;
  GridFunction f = GridFunction::from_samples(m, [&](double x) {
    // Recurrence over modes: rotate (cos, sin) by the base angle each step.
    const double c1 = std::cos(two_pi * x);
    const double s1 = std::sin(two_pi * x);
    double ck = c1, sk = s1, sum = 0.0;
    for (int k = 0; k < modes; ++k) {
      sum += ca[std::size_t(k)] * ck + cb[std::size_t(k)] * sk;
      const double cn = ck * c1 - sk * s1;
      sk = sk * c1 + ck * s1;
      ck = cn;
    }
    return sum;
  });
  const double lip = lip_seminorm(f);
  f.scale(lip > 0.0 ? K / lip : 0.0);
  return f;
}

/// Resamples the interpolant onto a grid refined by an integer factor; all
/// three norm estimators are invariant under this.
inline GridFunction refine(const GridFunction& f, int factor) {
  if (factor < 1) throw std::invalid_argument("refine: factor must be >= 1");
  const std::size_t m2 = f.m * std::size_t(factor);
  std::vector<double> v(m2 + 1);
  for (std::size_t i = 0; i <= m2; ++i) {
    const std::size_t q = i / std::size_t(factor);
    const std::size_t r = i % std::size_t(factor);
    v[i] = (r == 0) ? f.values[q]
                    : f.values[q] + (double(r) / double(factor)) *
                                        (f.values[q + 1] - f.values[q]);
  }
  return GridFunction(m2, std::move(v));
}

/// CSV serialization: header `x,value`, one row per grid point, 17
/// significant digits so parsing reproduces the doubles bit-exactly.
inline void write_csv(const GridFunction& f, std::ostream& os) {
  os << "x,value\n";
  char buf[64];
  for (std::size_t i = 0; i <= f.m; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", double(i) / double(f.m),
                  f.values[i]);
    os << buf << '\n';
  }
}

inline void write_csv(const GridFunction& f, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_csv(f, os);
}

}  // namespace gapmap
