#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "gapmap/zeta.hpp"

namespace gapmap {

// Geometry of the interval map T on [0,1).
//
// The unit interval splits into cells I_n = [s_{n-1}, s_n) of length 4*a_n,
// a_n = c/n^3, followed by a tail cell J = [s_inf, 1) cut into N equal
// pieces.  T maps every piece bijectively onto [0,1); we work throughout
// with its inverse branches:
//
//   cosine branch:  derivative a_n * (2 + cos(4 pi n^4 x)), image the left
//                   half of I_n
//   sine branch:    derivative a_n * (2 - cos(4 pi n^4 x)), image the right
//                   half of I_n
//   affine branch:  slope |J|/N, image the j-th piece of J
//
// The cosine/sine derivatives are the 1 + 2cos^2 / 1 + 2sin^2 profiles
// written with the double-angle identity, which is also how the closed-form
// antiderivatives below are obtained.

struct MapParams {
  double c;      // coefficient of a_n = c / n^3
  int N;         // number of affine pieces on the tail cell J
  int n_max;     // truncation index for the infinite branch family
  double zeta3;  // sum n^{-3}, used for |J| and tail bounds

  double a(int n) const {
    const double nn = double(n);
    return c / (nn * nn * nn);
  }
};

/// Validates and builds MapParams.  zeta(3) is computed from its series, not
/// hard-coded, so other exponents in a_n remain possible later.
inline MapParams make_params(double c, int N, int n_max) {
  if (!(c > 0.0))
    throw std::invalid_argument("make_params: c must be positive");
  if (N < 4)
    throw std::invalid_argument(
        "make_params: N must be at least 4 so the affine part contracts the "
        "Lipschitz norm by |J|^2/N <= 1/4");
  if (n_max < 1)
    throw std::invalid_argument("make_params: n_max must be at least 1");
  const double z3 = zeta3();
  if (c >= 1.0 / (4.0 * z3))
    throw std::invalid_argument(
        "make_params: c too large, total branch length 4*c*zeta(3) = " +
        std::to_string(4.0 * c * z3) + " must stay below 1");
  return MapParams{c, N, n_max, z3};
}

struct Partition {
  std::vector<double> s;  // s[0] = 0, s[n] = 4 * sum_{k<=n} a_k, n <= n_max
  double s_inf;           // 4 * c * zeta(3), left endpoint of J
  double j_len;           // |J| = 1 - s_inf
  double slope_j;         // |J| / N, inverse-branch slope on J
};

inline Partition make_partition(const MapParams& p) {
  Partition part;
  part.s.resize(std::size_t(p.n_max) + 1);
  part.s[0] = 0.0;
  for (int n = 1; n <= p.n_max; ++n)
    part.s[std::size_t(n)] = part.s[std::size_t(n) - 1] + 4.0 * p.a(n);
  part.s_inf = 4.0 * p.c * p.zeta3;
  part.j_len = 1.0 - part.s_inf;
  part.slope_j = part.j_len / double(p.N);
  return part;
}

enum class BranchKind { cosine, sine, affine };

struct Branch {
  BranchKind kind;
  int index;          // n for cosine/sine (1-based), j for affine (0-based)
  double image_left;
  double image_len;   // 2*a_n for cosine/sine, |J|/N for affine
};

inline Branch cosine_branch(const MapParams& p, const Partition& part, int n) {
  return Branch{BranchKind::cosine, n, part.s[std::size_t(n) - 1], 2.0 * p.a(n)};
}

inline Branch sine_branch(const MapParams& p, const Partition& part, int n) {
  return Branch{BranchKind::sine, n, part.s[std::size_t(n) - 1] + 2.0 * p.a(n),
                2.0 * p.a(n)};
}

inline Branch affine_branch(const MapParams&, const Partition& part, int j) {
  return Branch{BranchKind::affine, j, part.s_inf + double(j) * part.slope_j,
                part.slope_j};
}

/// All inverse branches in image order: cosine/sine pairs for n = 1..n_max,
/// then the N affine pieces.
inline std::vector<Branch> all_branches(const MapParams& p, const Partition& part) {
  std::vector<Branch> out;
  out.reserve(2 * std::size_t(p.n_max) + std::size_t(p.N));
  for (int n = 1; n <= p.n_max; ++n) {
    out.push_back(cosine_branch(p, part, n));
    out.push_back(sine_branch(p, part, n));
  }
  for (int j = 0; j < p.N; ++j)
    out.push_back(affine_branch(p, part, j));
  return out;
}

/// Inverse branch value at x in [0,1].  Closed forms come from integrating
/// the branch derivatives:
///   cosine: image_left + a_n * (2x + sin(4 pi n^4 x) / (4 pi n^4))
///   sine:   image_left + a_n * (2x - sin(4 pi n^4 x) / (4 pi n^4))
///   affine: image_left + x * |J|/N
inline double eval_branch(const MapParams& p, const Branch& b, double x) {
  if (b.kind == BranchKind::affine)
    return b.image_left + x * b.image_len;
  const double n = double(b.index);
  const double freq = 4.0 * std::numbers::pi * n * n * n * n;
  const double an = p.a(b.index);
  const double osc = std::sin(freq * x) / freq;
  if (b.kind == BranchKind::cosine)
    return b.image_left + an * (2.0 * x + osc);
  return b.image_left + an * (2.0 * x - osc);
}

/// Inverse branch derivative; always in [a_n, 3*a_n] for cosine/sine
/// branches and |J|/N for affine ones, so every branch is a contraction.
inline double eval_branch_deriv(const MapParams& p, const Branch& b, double x) {
  if (b.kind == BranchKind::affine)
    return b.image_len;
  const double n = double(b.index);
  const double freq = 4.0 * std::numbers::pi * n * n * n * n;
  const double an = p.a(b.index);
  if (b.kind == BranchKind::cosine)
    return an * (2.0 + std::cos(freq * x));
  return an * (2.0 - std::cos(freq * x));
}

/// Thrown when a point falls in the uncovered window [s_{n_max}, s_inf)
/// left by truncating the branch family; raising n_max shrinks it.
struct GapError : std::runtime_error {
  double y;
  explicit GapError(double y_)
      : std::runtime_error("forward map: point " + std::to_string(y_) +
                           " lies in the truncation window; raise n_max"),
        y(y_) {}
};

struct ForwardPoint {
  double x;       // image T(y)
  Branch branch;  // the inverse branch whose image contains y
};

namespace detail {

// Bisection on a monotone branch.  The branch derivative oscillates at
// frequency 4 pi n^4, so Newton steps can overshoot; bisection is
// unconditionally convergent and 60 halvings exhaust double precision.
// Accuracy is stated in x, not y: dy/dx can be as small as a_n and a
// y-tolerance would inflate the x-error by 1/a_n.
inline double invert_branch(const MapParams& p, const Branch& b, double y) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (eval_branch(p, b, mid) <= y)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// T itself: locates the branch whose image contains y and returns
/// T(y) = x with eval_branch(b, x) = y.  Affine branches invert in closed
/// form; cosine/sine branches by bisection.
inline ForwardPoint forward_map(const MapParams& p, const Partition& part, double y) {
  if (!(y >= 0.0) || y >= 1.0)
    throw std::domain_error("forward_map: point must lie in [0,1)");
  if (y >= part.s_inf) {
    int j = int((y - part.s_inf) / part.slope_j);
    j = std::clamp(j, 0, p.N - 1);
    const Branch b = affine_branch(p, part, j);
    double x = (y - b.image_left) / b.image_len;
    x = std::clamp(x, 0.0, 1.0);
    return ForwardPoint{x, b};
  }
  if (y >= part.s.back())
    throw GapError(y);
  // First n with s_n > y; its cell contains y.
  const auto it = std::upper_bound(part.s.begin(), part.s.end(), y);
  const int n = int(it - part.s.begin());
  const double mid = part.s[std::size_t(n) - 1] + 2.0 * p.a(n);
  const Branch b = (y < mid) ? cosine_branch(p, part, n) : sine_branch(p, part, n);
  return ForwardPoint{detail::invert_branch(p, b, y), b};
}

}  // namespace gapmap
