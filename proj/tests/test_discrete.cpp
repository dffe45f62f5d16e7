#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>

#include "hsps/discrete.hpp"
#include "hsps/errors.hpp"
#include "hsps/fock.hpp"
#include "hsps/model.hpp"
#include "hsps/rng.hpp"
#include "oracles.hpp"

using namespace hsps;
using cplx = std::complex<double>;

namespace {

const SpdcParams kPaper = SpdcParams::from_rate(1.2e7, 3e12);

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// TW = 504 lattice: W = 100 B, prime M = 1009.
DiscreteGrid wide_grid() {
  return DiscreteGrid::suggest(5.0 / kPaper.bandwidth,
                               100.0 * kPaper.bandwidth);
}

std::vector<cplx> random_nu(Xoshiro256pp& rng, int m, double scale) {
  std::vector<cplx> nu;
  for (int i = 0; i < m; ++i)
    nu.emplace_back(rng.uniform_pm(scale), rng.uniform_pm(scale));
  return nu;
}

// Off-diagonal closed form with the middle term left undivided, the way the
// expression is typeset; kept here to show the Fock oracle rejects it.
// (The shared-denominator reading implemented in the library is exact.)
double g2_cd_undivided(const TemporalCorrelations& tc, long k, long l) {
  const double r0 = tc.r0();
  const double q2 = r0 * (r0 - 1.0) * (r0 - 1.0);
  const double ck2 = std::norm(tc.C(k));
  const double cl2 = std::norm(tc.C(l));
  const cplx rkl = tc.R(k - l);
  const double denom = (q2 + ck2) * (q2 + cl2);
  return (q2 * (q2 + r0 * std::norm(rkl) + ck2 + cl2) -
          2.0 * (r0 - 1.0) * ck2 * cl2) /
             denom +
         2.0 * r0 * (r0 - 1.0) * std::real(tc.C(k) * std::conj(tc.C(l)) * rkl);
}

}  // namespace

TEST_CASE("discrete: primality and grid validation") {
  CHECK(is_prime(2));
  CHECK(is_prime(3));
  CHECK(is_prime(1009));
  CHECK(is_prime(8209));
  CHECK_FALSE(is_prime(1));
  CHECK_FALSE(is_prime(1001));
  CHECK_FALSE(is_prime(8193));

  DiscreteGrid g;
  g.time_window = 5.0 / kPaper.bandwidth;
  g.half_bandwidth = 100.0 * kPaper.bandwidth;  // M = 1001 = 7*11*13
  CHECK_THROWS_AS(g.validate(), ConfigError);
  const DiscreteGrid ok = DiscreteGrid::suggest(g.time_window, g.half_bandwidth);
  CHECK_NOTHROW(ok.validate());
  CHECK(is_prime(static_cast<std::uint64_t>(ok.mode_count())));
  CHECK(ok.mode_count() >= 1001);
  CHECK(ok.half_bandwidth == g.half_bandwidth);

  DiscreteGrid tiny;
  tiny.time_window = 1.0 / kPaper.bandwidth;
  tiny.half_bandwidth = 3.0 * kPaper.bandwidth;  // TW = 3 < 50
  CHECK_THROWS_AS(tiny.validate(), ConfigError);
  CHECK(wide_grid().coarse() == (wide_grid().time_window *
                                     wide_grid().half_bandwidth <
                                 500.0));
}

TEST_CASE("discrete: spectrum from the low-gain profile") {
  const DiscreteGrid g = wide_grid();
  const DiscreteSpectrum s = build_spectrum(kPaper, g);
  CHECK_NOTHROW(s.validate());
  const double amp = std::sqrt(kPaper.pair_rate / kPaper.bandwidth);
  CHECK(std::abs(s.nu[s.index(0)] - cplx(amp)) < 1e-15);

  // sinc zeros land on exact lattice modes when B T is an integer
  DiscreteGrid zg = DiscreteGrid::suggest(16.0 / kPaper.bandwidth,
                                          100.0 * kPaper.bandwidth);
  if (std::abs(zg.time_window * kPaper.bandwidth - 16.0) < 1e-9) {
    const DiscreteSpectrum zs = build_spectrum(kPaper, zg);
    CHECK(std::abs(zs.nu[zs.index(16)]) < 1e-12 * amp);
  }

  DiscreteGrid narrow = DiscreteGrid::suggest(200.0 / kPaper.bandwidth,
                                              0.5 * kPaper.bandwidth);
  CHECK_THROWS_AS(build_spectrum(kPaper, narrow), ConfigError);
}

TEST_CASE("discrete: temporal correlations match the continuum asymptotics") {
  const DiscreteGrid g = wide_grid();
  const DiscreteSpectrum s = build_spectrum(kPaper, g);
  const TemporalCorrelations tc(s);
  const double dt = g.dt();
  const double two_w = 2.0 * g.half_bandwidth;

  // R_0 - 1 ~ R(0) dt
  CHECK(rel(tc.r0() - 1.0, kPaper.pair_rate * dt) < 0.01);

  // C_n ~ C(n dt) / (2W) inside the rectangle, ~0 outside
  const double c_cont = std::sqrt(kPaper.pair_rate * kPaper.bandwidth);
  for (long n : {0L, 20L, 60L})
    CHECK(rel(std::abs(tc.C(n)) * two_w, c_cont) < 0.05);
  CHECK(std::abs(tc.C(400)) < 0.01 * std::abs(tc.C(0)));

  // R_n ~ R(n dt) / (2W) for n != 0, |n| dt <= T/4
  for (long n : {40L, 100L}) {
    const double expected = auto_corr(kPaper, n * dt) / two_w;
    CHECK(rel(tc.R(n).real(), expected) < 0.02);
  }
  // Hermitian symmetry
  for (long n : {1L, 7L, 33L}) {
    CHECK(std::abs(tc.R(n) - std::conj(tc.R(-n))) < 1e-12 * tc.r0());
    CHECK(std::abs(tc.C(n) - tc.C(-n)) < 1e-12 * std::abs(tc.C(0)));
  }
  // offsets are M-periodic
  const long m = g.mode_count();
  CHECK(std::abs(tc.R(m + 3) - tc.R(3)) < 1e-15 * tc.r0());
  CHECK(std::abs(tc.C(-m + 5) - tc.C(5)) < 1e-15 * std::abs(tc.C(0)));
}

TEST_CASE("discrete: detection probability") {
  // vacuum never clicks
  const std::vector<cplx> zeros(3, 0.0);
  const TemporalCorrelations vac{std::span<const cplx>(zeros)};
  CHECK(vac.r0() == 1.0);
  CHECK(detection_probability(vac) == 0.0);

  const DiscreteGrid g = wide_grid();
  const TemporalCorrelations tc(build_spectrum(kPaper, g));
  const double p = detection_probability(tc);
  CHECK(p > 0.0);
  CHECK(p < 1.0);
  CHECK(rel(p, kPaper.pair_rate * g.dt()) < 0.01);
}

TEST_CASE("discrete: g2_cd against the continuous model") {
  // a finer lattice for the trigger-slot value
  const DiscreteGrid g = DiscreteGrid::suggest(16.0 / kPaper.bandwidth,
                                               512.0 * kPaper.bandwidth);
  const TemporalCorrelations tc(build_spectrum(kPaper, g));
  CHECK(rel(g2_cd(tc, 0, 0), g2_cond_at_zero(kPaper)) < 1e-3);

  // far diagonal slot: thermal statistics
  const long far = static_cast<long>(std::llround(
      4.0 / kPaper.bandwidth / g.dt()));
  CHECK(rel(g2_cd(tc, far, far), 2.0) < 0.05);
  // one slot at the trigger, one far: uncorrelated
  CHECK(rel(g2_cd(tc, 0, far), 1.0) < 0.05);
  CHECK(g2_cd(tc, 2, 5) == doctest::Approx(g2_cd(tc, 5, 2)).epsilon(1e-12));

  // the quoted asymptotic diagonal form agrees on a W >> B lattice
  const double r0 = tc.r0();
  const double q2 = r0 * (r0 - 1.0) * (r0 - 1.0);
  const double c02 = std::norm(tc.C(0));
  const double frac = c02 / (q2 + c02);
  const double asymptotic = 2.0 - 2.0 * (2.0 - r0) * frac * frac;
  CHECK(rel(g2_cd(tc, 0, 0), asymptotic) < 5e-3);

  CHECK_THROWS_AS(g2_cd(tc, 0, g.half_modes() + 1), ConfigError);
}

TEST_CASE("discrete: closed forms agree with the truncated-Fock oracle") {
  Xoshiro256pp rng(41, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto nu = random_nu(rng, 3, 0.12);  // <n>/mode <= ~0.03
    const TemporalCorrelations tc{std::span<const cplx>(nu)};
    const FockOracle oracle(nu, 6);
    CHECK(oracle.mean_photons_per_mode() < 0.06);

    CHECK(rel(oracle.detection_probability(), detection_probability(tc)) <
          1e-6);
    for (long k = -1; k <= 1; ++k)
      for (long l = -1; l <= 1; ++l)
        CHECK(rel(g2_cd(tc, k, l), oracle.g2_cd(k, l)) < 1e-5);
  }
}

TEST_CASE("discrete: the undivided middle term fails the Fock oracle") {
  // The printed off-diagonal expression leaves the cross term without the
  // shared denominator; that variant disagrees with the brute-force state
  // algebra by orders of magnitude while the shared-denominator form holds.
  Xoshiro256pp rng(43, 0);
  const auto nu = random_nu(rng, 3, 0.12);
  const TemporalCorrelations tc{std::span<const cplx>(nu)};
  const FockOracle oracle(nu, 6);
  double worst_good = 0.0, worst_bad = 0.0;
  for (long k = -1; k <= 1; ++k)
    for (long l = -1; l <= 1; ++l) {
      if (k == l) continue;
      const double reference = oracle.g2_cd(k, l);
      worst_good = std::max(worst_good, rel(g2_cd(tc, k, l), reference));
      worst_bad =
          std::max(worst_bad, rel(g2_cd_undivided(tc, k, l), reference));
    }
  CHECK(worst_good < 1e-4);
  CHECK(worst_bad > 0.1);
  CHECK(worst_bad > 1e3 * worst_good);
}

TEST_CASE("discrete: fock oracle guardrails") {
  Xoshiro256pp rng(47, 0);
  const auto nu4 = random_nu(rng, 4, 0.1);
  CHECK_THROWS_AS(FockOracle(nu4, 4), ConfigError);  // even mode count
  const auto nu5 = random_nu(rng, 5, 0.1);
  CHECK_THROWS_AS(FockOracle(nu5, 8), ConfigError);  // dimension blow-up
}

TEST_CASE("discrete: convergence toward the continuous conditional") {
  std::vector<double> ws;
  for (double f : {8.0, 16.0, 32.0, 64.0}) ws.push_back(f * kPaper.bandwidth);
  const ConvergenceTable t = convergence_study(kPaper, 0, 0, ws, 16.0);
  REQUIRE(t.rows.size() == 4);
  CHECK(t.monotone);
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    CHECK(t.rows[i].decreased);
    CHECK(t.rows[i].rel_error < t.rows[i - 1].rel_error);
  }

  // shrinking W grows the error; the table flags it instead of hiding it
  std::vector<double> down = {64.0 * kPaper.bandwidth, 8.0 * kPaper.bandwidth};
  const ConvergenceTable bad = convergence_study(kPaper, 0, 0, down, 16.0);
  CHECK_FALSE(bad.monotone);
  CHECK_FALSE(bad.rows[1].decreased);

  CHECK_THROWS_AS(convergence_study(kPaper, 0, 0, {}, 16.0), ConfigError);
}

TEST_CASE("discrete: convergence table CSV") {
  std::vector<double> ws = {16.0 * kPaper.bandwidth, 32.0 * kPaper.bandwidth};
  const ConvergenceTable t = convergence_study(kPaper, 0, 0, ws, 16.0);
  const auto path =
      std::filesystem::temp_directory_path() / "hsps_convergence.csv";
  save_convergence_csv(t, path.string());
  std::ifstream f(path);
  std::string text((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  CHECK(text.find("monotone=1") != std::string::npos);
  CHECK(text.find("rel_error") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') >= 4);
  std::filesystem::remove(path);
}

TEST_CASE("discrete: convergence study keeps physical times fixed") {
  std::vector<double> ws = {16.0 * kPaper.bandwidth, 32.0 * kPaper.bandwidth,
                            64.0 * kPaper.bandwidth};
  const ConvergenceTable t = convergence_study(kPaper, 24, -8, ws, 16.0);
  const double t1 = t.rows[0].k / (2.0 * t.rows[0].half_bandwidth);
  for (const auto& row : t.rows) {
    CHECK(rel(row.k / (2.0 * row.half_bandwidth), t1) < 1e-9);
    CHECK(row.rel_error < 1.0);
  }
}
