#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "gapmap/grid_function.hpp"
#include "gapmap/map.hpp"
#include "gapmap/parallel.hpp"
#include "gapmap/zeta.hpp"

namespace gapmap {

// Transfer operator L f(x) = sum_{T(y)=x} f(y) / T'(y), assembled from its
// pieces: one operator per cosine/sine branch pair plus the affine part.
// The infinite branch family is truncated at n_max; what is dropped is
// never folded silently into function values but returned as an explicit
// TailBound so downstream experiments can state honest tolerances.

/// Analytic bounds on the truncation error, per unit of the input norm:
///   sup_tail = 4c * sum_{n > n_max} n^{-3}        (sup norm of dropped mass)
///   lip_tail = sum_{n > n_max} a_n (32 pi n^4 a_n + 8)
///            = 32 pi c^2 sum n^{-2} + 8 c sum n^{-3}
/// the latter via the per-pair Lipschitz bound, see verify_pair_bound.
struct TailBound {
  double sup_tail = 0.0;
  double lip_tail = 0.0;
};

inline TailBound tail_coefficients(const MapParams& p) {
  // Difference of the cached zeta value and the small partial sum, so the
  // identity s_{n_max} + |J| = 1 - sup_tail holds to machine precision
  // rather than to the accuracy of two separate big summations.
  const double t3 = p.zeta3 - partial_inv_cube(p.n_max);
  const double t2 = zeta2() - partial_inv_square(p.n_max);
  TailBound tb;
  tb.sup_tail = 4.0 * p.c * t3;
  tb.lip_tail = 32.0 * std::numbers::pi * p.c * p.c * t2 + 8.0 * p.c * t3;
  return tb;
}

/// Tail bound scaled by the norms of a concrete input function.
inline TailBound scale_tail(const TailBound& unit, const GridFunction& f) {
  const double sup = sup_norm(f);
  const double lip = lip_seminorm(f);
  return TailBound{unit.sup_tail * sup, unit.lip_tail * (sup + lip)};
}

struct TransferResult {
  GridFunction f;
  TailBound tail;
};

/// One branch pair: L_n f(x) = v'(x) f(v x) + w'(x) f(w x) with the
/// cosine/sine branches v, w of index n.  Each summand alone is badly
/// behaved in the Lipschitz norm; the oscillating parts of the two
/// derivatives cancel in the sum.
inline GridFunction apply_pair(const MapParams& p, const Partition& part, int n,
                               const GridFunction& f) {
  if (n < 1 || n > p.n_max)
    throw std::invalid_argument("apply_pair: branch index out of range");
  const double an = p.a(n);
  const double nn = double(n);
  const double freq = 4.0 * std::numbers::pi * nn * nn * nn * nn;
  const double inv_freq = 1.0 / freq;
  const double left_v = part.s[std::size_t(n) - 1];
  const double left_w = left_v + 2.0 * an;
  const std::size_t m = f.m;
  const double inv_m = 1.0 / double(m);
  GridFunction out = GridFunction::constant(m, 0.0);
  parallel_for(0, m + 1, [&](std::size_t i) {
    const double x = double(i) * inv_m;
    const double th = freq * x;
    const double c = std::cos(th);
    const double osc = std::sin(th) * inv_freq;
    const double yv = left_v + an * (2.0 * x + osc);
    const double yw = left_w + an * (2.0 * x - osc);
    out.values[i] = an * ((2.0 + c) * f.eval(yv) + (2.0 - c) * f.eval(yw));
  });
  return out;
}

/// The two halves of L_n f / a_n used to prove the pair bound:
///   g1(x) = f(v x) + 3 f(w x)
///   g2(x) = cos^2(2 pi n^4 x) (f(v x) - f(w x))
/// so that a_n (g1 + 2 g2) = L_n f pointwise.
inline std::pair<GridFunction, GridFunction> apply_pair_split(
    const MapParams& p, const Partition& part, int n, const GridFunction& f) {
  if (n < 1 || n > p.n_max)
    throw std::invalid_argument("apply_pair_split: branch index out of range");
  const double an = p.a(n);
  const double nn = double(n);
  const double freq = 4.0 * std::numbers::pi * nn * nn * nn * nn;
  const double inv_freq = 1.0 / freq;
  const double left_v = part.s[std::size_t(n) - 1];
  const double left_w = left_v + 2.0 * an;
  const std::size_t m = f.m;
  const double inv_m = 1.0 / double(m);
  GridFunction g1 = GridFunction::constant(m, 0.0);
  GridFunction g2 = GridFunction::constant(m, 0.0);
  parallel_for(0, m + 1, [&](std::size_t i) {
    const double x = double(i) * inv_m;
    const double th = freq * x;
    const double c = std::cos(th);
    const double osc = std::sin(th) * inv_freq;
    const double fv = f.eval(left_v + an * (2.0 * x + osc));
    const double fw = f.eval(left_w + an * (2.0 * x - osc));
    g1.values[i] = fv + 3.0 * fw;
    g2.values[i] = 0.5 * (1.0 + c) * (fv - fw);  // cos^2 via double angle
  });
  return {std::move(g1), std::move(g2)};
}

/// Affine part: M f(x) = (|J|/N) * sum_j f(s_inf + (j + x) |J|/N).
inline GridFunction apply_affine(const MapParams& p, const Partition& part,
                                 const GridFunction& f) {
  const std::size_t m = f.m;
  const double inv_m = 1.0 / double(m);
  GridFunction out = GridFunction::constant(m, 0.0);
  parallel_for(0, m + 1, [&](std::size_t i) {
    const double x = double(i) * inv_m;
    double sum = 0.0;
    for (int j = 0; j < p.N; ++j)
      sum += f.eval(part.s_inf + (double(j) + x) * part.slope_j);
    out.values[i] = part.slope_j * sum;
  });
  return out;
}

/// Truncated transfer operator sum_{n<=n_max} L_n + M, with the analytic
/// tail bound scaled by the input's norms.  Branch order n = 1..n_max then
/// the affine part, fixed for reproducibility.
inline TransferResult apply_transfer(const MapParams& p, const Partition& part,
                                     const GridFunction& f) {
  const TailBound unit = tail_coefficients(p);
  GridFunction out = GridFunction::constant(f.m, 0.0);
  for (int n = 1; n <= p.n_max; ++n) {
    const GridFunction piece = apply_pair(p, part, n, f);
    for (std::size_t i = 0; i <= f.m; ++i) out.values[i] += piece.values[i];
  }
  const GridFunction aff = apply_affine(p, part, f);
  for (std::size_t i = 0; i <= f.m; ++i) out.values[i] += aff.values[i];
  return TransferResult{std::move(out), scale_tail(unit, f)};
}

/// k-fold application.  Sup-tail errors propagate through later steps
/// unamplified (the truncated operator is a sup-norm contraction) and
/// accumulate additively; the Lipschitz component of an error additionally
/// passes through the 3/4-contraction-plus-sup inequality each step.
inline TransferResult apply_power(const MapParams& p, const Partition& part,
                                  const GridFunction& f, int k) {
  if (k < 1) throw std::invalid_argument("apply_power: k must be >= 1");
  TransferResult r = apply_transfer(p, part, f);
  for (int step = 1; step < k; ++step) {
    const TailBound carried = r.tail;
    r = apply_transfer(p, part, r.f);
    r.tail.sup_tail += carried.sup_tail;
    r.tail.lip_tail += 0.75 * (carried.sup_tail + carried.lip_tail) + carried.sup_tail;
  }
  return r;
}

}  // namespace gapmap
