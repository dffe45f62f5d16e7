#include <doctest.h>

#include <cmath>

#include "hsps/errors.hpp"
#include "hsps/fit.hpp"
#include "hsps/rng.hpp"

using namespace hsps;

namespace {

constexpr double kTrueRatePerMw = 1.2e6;
constexpr double kTrueTauD = 0.35e-9;
constexpr double kBandwidth = 3e12;

// Synthetic curve from the forward model itself at exact parameters.
GsiCurveData synth_curve(double pump_mw, double tau_coin, double rel_sigma) {
  const SpdcParams p = SpdcParams::from_pump(kTrueRatePerMw, pump_mw, kBandwidth);
  DetectorModel det;
  det.jitter_halfwidth = kTrueTauD;
  const CoincidenceConfig win{tau_coin};
  const ResponseModel model(p, det, win, EvalMode::delta);
  GsiCurveData c;
  c.pump_mw = pump_mw;
  c.tau_coin = tau_coin;
  const double w = 2.0 * tau_coin;
  for (int k = -6; k <= 6; ++k) {
    const double tau = k * w;
    const double v = model.g2bar_si(tau);
    c.points.push_back({tau, v, rel_sigma * v});
  }
  return c;
}

FitProblem synth_problem(double rel_sigma) {
  FitProblem prob;
  prob.bandwidth.value = kBandwidth;
  for (double mw : {4.0, 8.0, 12.0})
    prob.gsi_curves.push_back(synth_curve(mw, 0.39e-9, rel_sigma));
  return prob;
}

}  // namespace

TEST_CASE("fit: problem validation") {
  FitProblem empty;
  CHECK_THROWS_AS(empty.validate(), FitError);

  // single dataset at a single power and window is not identifiable
  FitProblem single;
  single.gsi_curves.push_back(synth_curve(8.0, 0.39e-9, 1e-3));
  CHECK_THROWS_AS(single.validate(), FitError);
  CHECK_THROWS_AS(fit(single), FitError);

  FitProblem bad_sigma = synth_problem(1e-3);
  bad_sigma.gsi_curves[0].points[0].sigma = 0.0;
  CHECK_THROWS_AS(bad_sigma.validate(), FitError);

  FitProblem no_free = synth_problem(1e-3);
  no_free.rate_per_mw.free = false;
  no_free.tau_d.free = false;
  CHECK_THROWS_AS(no_free.validate(), FitError);
}

TEST_CASE("fit: noiseless round trip recovers the parameters") {
  const FitProblem prob = synth_problem(1e-3);
  const FitResult r = fit(prob);
  CHECK(std::abs(r.rate_per_mw - kTrueRatePerMw) / kTrueRatePerMw < 1e-3);
  CHECK(std::abs(r.tau_d - kTrueTauD) / kTrueTauD < 1e-3);
  CHECK(r.bandwidth == kBandwidth);  // fixed
  CHECK(r.chi2 / r.dof < 0.1);
  CHECK(r.rate_per_mw_sigma > 0.0);
  CHECK(r.tau_d_sigma > 0.0);
  CHECK(r.reference_power_mw == 12.0);
  // inferred true coherence matches the closed form at the reference rate
  const auto direct = infer_true_g2c0(r.rate_per_mw * 12.0, kBandwidth);
  CHECK(r.g2c0 == doctest::Approx(direct.first).epsilon(1e-9));
}

TEST_CASE("fit: noisy trials stay inside the reported uncertainty") {
  Xoshiro256pp rng(71, 0);
  int rate_ok = 0, tau_ok = 0;
  const int trials = 50;
  for (int t = 0; t < trials; ++t) {
    FitProblem prob = synth_problem(0.01);
    for (auto& curve : prob.gsi_curves)
      for (auto& pt : curve.points) {
        // Box-Muller normal noise
        const double u1 = std::max(rng.uniform(), 1e-12);
        const double u2 = rng.uniform();
        const double z = std::sqrt(-2.0 * std::log(u1)) *
                         std::cos(2.0 * M_PI * u2);
        pt.value += z * pt.sigma;
      }
    const FitResult r = fit(prob);
    if (std::abs(r.rate_per_mw - kTrueRatePerMw) <= 2.0 * r.rate_per_mw_sigma)
      ++rate_ok;
    if (std::abs(r.tau_d - kTrueTauD) <= 2.0 * r.tau_d_sigma) ++tau_ok;
  }
  // ~95% coverage expected per parameter; allow binomial fluctuation
  CHECK(rate_ok >= 44);
  CHECK(tau_ok >= 44);
}

TEST_CASE("fit: flat bandwidth direction raises an identifiability error") {
  // the averaged curves depend on B only at relative order R/B, so freeing
  // it must trip the curvature condition check
  FitProblem prob = synth_problem(1e-3);
  prob.bandwidth.free = true;
  CHECK_THROWS_WITH_AS(static_cast<void>(fit(prob)),
                       doctest::Contains("bandwidth"), FitError);
}

TEST_CASE("fit: inferred trigger-time coherence") {
  CHECK(infer_true_g2c0(1.428e7, 3e12).first ==
        doctest::Approx(1.90e-5).epsilon(0.01));
  CHECK(infer_true_g2c0(1.5e7, 3e12).first ==
        doctest::Approx(2.0e-5).epsilon(0.05));
  CHECK(infer_true_g2c0(0.0, 3e12).first == 0.0);

  // first-order propagation: 1% rate error maps to ~1% on the value
  std::array<std::array<double, 2>, 2> cov{};
  cov[0][0] = std::pow(0.01 * 1.428e7, 2);
  const auto [v, s] = infer_true_g2c0(1.428e7, 3e12, cov);
  CHECK(s / v == doctest::Approx(0.01).epsilon(0.05));
}

TEST_CASE("fit: json round trips reject unknown keys") {
  FitProblem prob = synth_problem(1e-3);
  prob.gc0_points.push_back({11.9, 0.39e-9, 0.027, 0.002});
  prob.reference_power_mw = 11.9;
  const std::string text = fit_problem_to_json(prob);
  const FitProblem back = fit_problem_from_json(text);
  CHECK(back.gsi_curves.size() == prob.gsi_curves.size());
  CHECK(back.gc0_points.size() == 1);
  CHECK(back.gc0_points[0].value == 0.027);
  CHECK(back.reference_power_mw == 11.9);
  CHECK(back.rate_per_mw.free == prob.rate_per_mw.free);
  CHECK(back.gsi_curves[2].points[3].value ==
        prob.gsi_curves[2].points[3].value);

  CHECK_THROWS_AS(fit_problem_from_json("{\"schema\":\"nope\"}"), ConfigError);
  CHECK_THROWS_AS(
      fit_problem_from_json(
          "{\"schema\":\"hsps-fit-problem/1\",\"surprise\":1}"),
      ConfigError);

  const FitResult r = fit(prob);
  const FitResult rback = fit_result_from_json(fit_result_to_json(r));
  CHECK(rback.rate_per_mw == r.rate_per_mw);
  CHECK(rback.g2c0 == r.g2c0);
  CHECK(rback.covariance == r.covariance);
}
