#include "catch_amalgamated.hpp"

#include <cmath>
#include <sstream>

#include "gapmap/grid_function.hpp"
#include "gapmap/map.hpp"
#include "gapmap/spectral.hpp"
#include "gapmap/transfer.hpp"

using namespace gapmap;

namespace {
const MapParams p0 = make_params(0.01, 4, 8);
const Partition part0 = make_partition(p0);
constexpr std::size_t kM = 1 << 13;
}  // namespace

TEST_CASE("constant function is fixed up to the analytic tail") {
  const SpectralReport rep = estimate_gap(p0, part0, kM, 42, 16);
  REQUIRE(rep.lambda1 == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("gap estimate is strictly inside the unit disk") {
  const SpectralReport rep = estimate_gap(p0, part0, kM, 42, 32);
  REQUIRE(rep.lambda2_estimate > 0.0);
  REQUIRE(rep.lambda2_estimate < 1.0);
  REQUIRE(rep.residual >= 0.0);
  REQUIRE(rep.iterations == 32);
  REQUIRE(rep.ratios.size() == 32);
  REQUIRE(rep.grid_m == kM);
  REQUIRE(rep.seed == 42);
  // One step can at most multiply the norm by 3/4 + sup/(sup+lip) < 7/4.
  for (double r : rep.ratios) REQUIRE(r < 1.75);
  REQUIRE(ratios_eventually_below(rep.ratios, 1.0, 10));
}

TEST_CASE("degenerate start functions are rejected") {
  REQUIRE_THROWS_AS(estimate_gap(p0, part0, GridFunction::constant(kM, 3.0), 16),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(estimate_gap(p0, part0, kM, 42, 5), std::invalid_argument);
}

TEST_CASE("zero mean is preserved up to the tail") {
  auto f = random_lipschitz(kM, 7, 1.0, 9);
  f.shift(-integral(f));
  const auto lf = apply_transfer(p0, part0, f).f;
  REQUIRE(std::abs(integral(lf)) <=
          tail_coefficients(p0).sup_tail * sup_norm(f) + 1e-8);
}

TEST_CASE("correlations of constants vanish") {
  const auto c = GridFunction::constant(kM, 2.0);
  const auto g = random_lipschitz(kM, 8, 1.0, 5);
  for (double cov : correlation_decay(p0, part0, c, g, 6))
    REQUIRE(std::abs(cov) <= 1e-10);
  REQUIRE_THROWS_AS(correlation_decay(p0, part0, c, g, 0), std::invalid_argument);
}

TEST_CASE("correlations decay geometrically") {
  auto f = random_lipschitz(kM, 9, 1.0, 6);
  f.shift(-integral(f));
  const auto g = random_lipschitz(kM, 10, 1.0, 13);
  const auto cov = correlation_decay(p0, part0, f, g, 15);

  // Least-squares slope of log |Cov_k| against k.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < cov.size(); ++i) {
    const double x = double(i + 1);
    const double y = std::log(std::abs(cov[i]) + 1e-300);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  const double npts = double(cov.size());
  const double slope = (npts * sxy - sx * sy) / (npts * sxx - sx * sx);
  REQUIRE(slope <= std::log(0.95));

  // Spectral envelope with the measured gap estimate.
  const SpectralReport rep = estimate_gap(p0, part0, kM, 42, 32);
  const double unit_tail = tail_coefficients(p0).sup_tail;
  for (std::size_t i = 0; i < cov.size(); ++i) {
    const double k = double(i + 1);
    REQUIRE(std::abs(cov[i]) <=
            2.0 * std::pow(rep.lambda2_estimate, k) * lip_norm(f) * sup_norm(g) +
                k * unit_tail);
  }
}

TEST_CASE("decay detector") {
  const std::vector<double> good = {0.9, 0.5, 0.31, 0.30, 0.30, 0.29, 0.30,
                                    0.30, 0.29, 0.30, 0.30, 0.30};
  REQUIRE(ratios_eventually_below(good, 0.35, 10));
  REQUIRE_FALSE(ratios_eventually_below(good, 0.25, 10));
  REQUIRE_FALSE(ratios_eventually_below(std::vector<double>{0.1, 0.2}, 0.5, 10));

  // Injected oscillation: a unit-modulus component alternating in sign
  // keeps the norm sequence from decaying, and the detector must say so.
  auto f = random_lipschitz(kM, 11, 1.0, 7);
  f.shift(-integral(f));
  f.scale(1.0 / lip_norm(f));
  const GridFunction spike = random_lipschitz(kM, 12, 1.0, 3);
  std::vector<double> norms;
  GridFunction iter = f;
  double carried = 1.0;
  for (int k = 0; k < 20; ++k) {
    GridFunction polluted = iter;
    polluted.add_scaled(spike, (k % 2 ? -0.5 : 0.5) / carried);
    norms.push_back(lip_norm(polluted) * carried);
    GridFunction next = apply_transfer(p0, part0, iter).f;
    next.shift(-integral(next));
    const double nn = lip_norm(next);
    carried *= nn;
    next.scale(1.0 / nn);
    iter = std::move(next);
  }
  std::vector<double> ratios;
  for (std::size_t k = 1; k < norms.size(); ++k)
    ratios.push_back(norms[k] / norms[k - 1]);
  REQUIRE_FALSE(ratios_eventually_below(ratios, 0.9, 10));
}

TEST_CASE("peripheral spectrum check") {
  const SpectralReport rep = estimate_gap(p0, part0, kM, 42, 32);
  REQUIRE(check_peripheral_decay(p0, part0, rep, 8));
  REQUIRE_THROWS_AS(check_peripheral_decay(p0, part0, rep, 4), std::invalid_argument);
}

TEST_CASE("correlation csv") {
  std::ostringstream os;
  write_correlation_csv(std::vector<double>{0.25, -0.125}, os);
  REQUIRE(os.str() == "k,cov\n1,0.25\n2,-0.125\n");
}

TEST_CASE("report serialization") {
  const SpectralReport rep = estimate_gap(p0, part0, 1 << 10, 42, 12);
  nlohmann::json j = rep;
  REQUIRE(j.contains("lambda1"));
  REQUIRE(j.contains("lambda2_estimate"));
  REQUIRE(j.contains("residual"));
  REQUIRE(j.contains("tail"));
  REQUIRE(j["grid_m"] == 1024);
}
