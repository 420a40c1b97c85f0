#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "gapmap/grid_function.hpp"
#include "gapmap/map.hpp"
#include "gapmap/transfer.hpp"

#include "json.hpp"

namespace gapmap {

// Numerical spectral picture of the transfer operator: the constant
// function is fixed up to the analytic truncation tail, and power iteration
// on the zero-mean subspace estimates the modulus of the rest of the
// spectrum.  The iteration runs in the Lipschitz norm, where the operator
// actually has its gap; no specific second eigenvalue is asserted anywhere,
// only stability properties of the estimate.

struct SpectralReport {
  double lambda1 = 0.0;           // should be 1 up to the analytic tail
  double lambda2_estimate = 0.0;  // modulus estimate on the zero-mean subspace
  int iterations = 0;
  double residual = 0.0;          // ||L g - lambda2 g||_Lip at convergence
  std::size_t grid_m = 0;
  int n_max = 0;
  std::uint64_t seed = 0;         // start-function seed, for reproducibility
  TailBound tail;                 // per-unit-norm truncation coefficients
  std::vector<double> ratios;     // per-step Lipschitz norm ratios
};

inline void to_json(nlohmann::json& j, const TailBound& tb) {
  j = nlohmann::json{{"sup_tail", tb.sup_tail}, {"lip_tail", tb.lip_tail}};
}

inline void to_json(nlohmann::json& j, const SpectralReport& r) {
  j = nlohmann::json{{"lambda1", r.lambda1},
                     {"lambda2_estimate", r.lambda2_estimate},
                     {"iterations", r.iterations},
                     {"residual", r.residual},
                     {"grid_m", r.grid_m},
                     {"n_max", r.n_max},
                     {"seed", r.seed},
                     {"tail", r.tail},
                     {"ratios", r.ratios}};
}

namespace detail {

inline void project_zero_mean(GridFunction& f) {
  f.shift(-integral(f));
}

}  // namespace detail

/// Power iteration from an explicit start function.  Each step applies the
/// operator, re-projects to zero mean (quadrature drift toward the
/// dominant eigenfunction would fake a unit eigenvalue) and renormalizes in
/// the Lipschitz norm.  The estimate is the geometric mean of the last
/// ceil(iters/2) norm ratios, which averages out the oscillation a complex
/// pair would produce.
inline SpectralReport estimate_gap(const MapParams& p, const Partition& part,
                                   GridFunction f0, int iters) {
  if (iters < 10) throw std::invalid_argument("estimate_gap: iters must be >= 10");
  SpectralReport rep;
  rep.grid_m = f0.m;
  rep.n_max = p.n_max;
  rep.tail = tail_coefficients(p);
  rep.iterations = iters;

  detail::project_zero_mean(f0);
  double nf = lip_norm(f0);
  if (nf == 0.0)
    throw std::invalid_argument("estimate_gap: start function is constant");
  f0.scale(1.0 / nf);

  // Constant-function check: the truncated operator fixes constants up to
  // exactly the dropped branch mass, so adding the analytic tail back
  // recovers the unit eigenvalue.
  const GridFunction lone = apply_transfer(p, part, GridFunction::constant(f0.m, 1.0)).f;
  rep.lambda1 = sup_norm(lone) + rep.tail.sup_tail;

  rep.ratios.reserve(std::size_t(iters));
  for (int t = 0; t < iters; ++t) {
    GridFunction g = apply_transfer(p, part, f0).f;
    detail::project_zero_mean(g);
    const double ng = lip_norm(g);
    if (!(ng > 1e-250)) {
      // Underflow: the zero-mean component has died out entirely; any
      // ratio this small certifies a gap.
      rep.ratios.push_back(0.0);
      rep.lambda2_estimate = 0.0;
      rep.residual = 0.0;
      rep.iterations = t + 1;
      return rep;
    }
    rep.ratios.push_back(ng);  // f0 has unit norm
    g.scale(1.0 / ng);
    f0 = std::move(g);
  }

  const std::size_t window = (std::size_t(iters) + 1) / 2;
  double log_sum = 0.0;
  for (std::size_t t = rep.ratios.size() - window; t < rep.ratios.size(); ++t)
    log_sum += std::log(rep.ratios[t]);
  rep.lambda2_estimate = std::exp(log_sum / double(window));

  GridFunction lg = apply_transfer(p, part, f0).f;
  detail::project_zero_mean(lg);
  lg.add_scaled(f0, -rep.lambda2_estimate);
  rep.residual = lip_norm(lg);
  return rep;
}

/// Seeded variant: random Lipschitz start with unit seminorm.
inline SpectralReport estimate_gap(const MapParams& p, const Partition& part,
                                   std::size_t grid_m, std::uint64_t seed,
                                   int iters, int modes = 8) {
  SpectralReport rep =
      estimate_gap(p, part, random_lipschitz(grid_m, seed, 1.0, modes), iters);
  rep.seed = seed;
  return rep;
}

/// Covariances Cov_k = int (L^k f) g - int f int g for k = 1..k_max,
/// computed incrementally.  By duality these equal int f * (g o T^k) minus
/// the product of means.
inline std::vector<double> correlation_decay(const MapParams& p, const Partition& part,
                                             const GridFunction& f,
                                             const GridFunction& g, int k_max) {
  if (k_max < 1) throw std::invalid_argument("correlation_decay: k_max must be >= 1");
  const double mean_prod = integral(f) * integral(g);
  std::vector<double> cov;
  cov.reserve(std::size_t(k_max));
  GridFunction h = f;
  for (int k = 1; k <= k_max; ++k) {
    h = apply_transfer(p, part, h).f;
    cov.push_back(integral_product(h, g) - mean_prod);
  }
  return cov;
}

/// True when every one of the last `window` ratios sits at or below the
/// threshold: sustained geometric decay, no lingering oscillation.
inline bool ratios_eventually_below(std::span<const double> ratios, double threshold,
                                    int window) {
  if (ratios.size() < std::size_t(window)) return false;
  for (std::size_t t = ratios.size() - std::size_t(window); t < ratios.size(); ++t)
    if (!(ratios[t] <= threshold)) return false;
  return true;
}

/// Checks that no eigenvalue other than 1 sits on the unit circle: any such
/// eigenvalue would keep the Lipschitz norms of real zero-mean iterates
/// from decaying.  Runs `angles` independent random probes and requires the
/// last 10 norm ratios of each to stay below lambda2_estimate + 0.05.
inline bool check_peripheral_decay(const MapParams& p, const Partition& part,
                                   const SpectralReport& report, int angles) {
  if (angles < 8)
    throw std::invalid_argument("check_peripheral_decay: angles must be >= 8");
  const double threshold = report.lambda2_estimate + 0.05;
  const int window = 10;
  // The probes only need their trailing ratios settled, which happens
  // within the first dozen steps; 32 keeps eight probes affordable at the
  // largest default grids.
  const int iters = std::clamp(report.iterations, 2 * window, 32);
  for (int a = 0; a < angles; ++a) {
    GridFunction f = random_lipschitz(report.grid_m, report.seed + 101 + std::uint64_t(a),
                                      1.0, 4 + (a % 13));
    detail::project_zero_mean(f);
    double nf = lip_norm(f);
    if (nf == 0.0) return false;
    f.scale(1.0 / nf);
    std::vector<double> ratios;
    ratios.reserve(std::size_t(iters));
    for (int t = 0; t < iters; ++t) {
      GridFunction g = apply_transfer(p, part, f).f;
      detail::project_zero_mean(g);
      const double ng = lip_norm(g);
      if (!(ng > 1e-250)) {
        ratios.push_back(0.0);
        break;
      }
      ratios.push_back(ng);
      g.scale(1.0 / ng);
      f = std::move(g);
    }
    if (!ratios_eventually_below(ratios, threshold,
                                 std::min(window, int(ratios.size()))))
      return false;
  }
  return true;
}

inline void write_correlation_csv(std::span<const double> cov, std::ostream& os) {
  os << "k,cov\n";
  char buf[48];
  for (std::size_t k = 0; k < cov.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g", k + 1, cov[k]);
    os << buf << '\n';
  }
}

}  // namespace gapmap
