#pragma once

#include <array>
#include <string>
#include <vector>

#include "hsps/coincidence.hpp"
#include "hsps/response.hpp"

namespace hsps {

/// One measured (or simulated) time-averaged signal-idler coherence curve
/// at a known pump power and coincidence window.
struct GsiCurveData {
  double pump_mw = 0.0;
  double tau_coin = 0.0;  ///< seconds
  std::vector<CurvePoint> points;
};

/// A single conditional-coherence dip minimum.
struct Gc0Point {
  double pump_mw = 0.0;
  double tau_coin = 0.0;
  double value = 0.0;
  double sigma = 0.0;
};

struct ParamSpec {
  bool free = true;
  double value = 0.0;  ///< fixed value, or starting hint when free
  double lo = 0.0;
  double hi = 0.0;
};

/// Weighted least-squares problem: recover (rate_per_mw, bandwidth, tau_d)
/// from coherence data across pump powers and windows.  The bandwidth only
/// enters the averaged curves at relative order R/B, so it is fixed by
/// default (spectroscopy value) and any parameter can be frozen.
struct FitProblem {
  std::vector<GsiCurveData> gsi_curves;
  std::vector<Gc0Point> gc0_points;

  ParamSpec rate_per_mw{true, 1.2e6, 1e3, 1e9};
  ParamSpec bandwidth{false, 3e12, 1e10, 1e14};
  ParamSpec tau_d{true, 0.35e-9, 0.0, 5e-9};

  double reference_power_mw = 0.0;  ///< 0: use the largest dataset power

  /// Throws FitError when not identifiable by construction: needs at least
  /// two datasets at distinct pump powers or distinct windows, positive
  /// sigmas and more points than free parameters.
  void validate() const;
};

struct FitResult {
  double rate_per_mw = 0.0, rate_per_mw_sigma = 0.0;
  double bandwidth = 0.0, bandwidth_sigma = 0.0;
  double tau_d = 0.0, tau_d_sigma = 0.0;
  /// Covariance in (rate_per_mw, bandwidth, tau_d) order; zero rows/columns
  /// for fixed parameters.
  std::array<std::array<double, 3>, 3> covariance{};
  double chi2 = 0.0;
  long dof = 0;
  double reference_power_mw = 0.0;
  double reference_rate = 0.0;  ///< rate_per_mw * reference power
  double g2c0 = 0.0;            ///< inferred true conditional coherence
  double g2c0_sigma = 0.0;
  long starts = 0;
  long evaluations = 0;
};

/// Multi-start (8 log-spaced points per free dimension) Nelder-Mead
/// refinement of the weighted least squares against the delta-mode response
/// model.  Deterministic; ties resolve to the lowest start index.  Raises
/// FitError naming the degenerate direction when the curvature condition
/// number exceeds 1e8.
FitResult fit(const FitProblem& problem);

/// True trigger-time conditional coherence from fitted source parameters,
/// with first-order uncertainty propagation.  cov is the 2x2 covariance of
/// (pair_rate, bandwidth).
std::pair<double, double> infer_true_g2c0(
    double pair_rate, double bandwidth,
    const std::array<std::array<double, 2>, 2>& cov = {{{0, 0}, {0, 0}}});

/// Versioned JSON round trip (schemas hsps-fit-problem/1 and
/// hsps-fit-result/1); unknown keys are rejected.
std::string fit_problem_to_json(const FitProblem& p);
FitProblem fit_problem_from_json(const std::string& text);
std::string fit_result_to_json(const FitResult& r);
FitResult fit_result_from_json(const std::string& text);

}  // namespace hsps
