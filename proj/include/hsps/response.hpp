#pragma once

#include <span>
#include <vector>

#include "hsps/model.hpp"
#include "hsps/piecewise.hpp"

namespace hsps {

/// Photodetector description.  Detection times are uniformly jittered over
/// [t - jitter_halfwidth, t + jitter_halfwidth]; efficiency and dead time
/// affect only the simulator (the normalized coherence curves are
/// efficiency-independent).
struct DetectorModel {
  double jitter_halfwidth = 0.35e-9;   ///< tau_d, seconds
  double efficiency = 0.4;             ///< quantum efficiency, (0, 1]
  double dead_time = 45e-9;            ///< seconds
  double tag_resolution = 156.25e-12;  ///< seconds per tick

  void validate() const;
};

/// Coincidence acceptance: two events are coincident when their delay lies
/// in [-tau_coin, +tau_coin), a window of full width 2*tau_coin.
struct CoincidenceConfig {
  double coin_halfwidth = 0.39e-9;  ///< tau_coin, seconds

  void validate() const;
  /// True when the half-width lies in the 0.25-10 ns range the counting
  /// hardware was designed for; callers may warn outside it.
  bool in_apparatus_range() const;
};

/// Evaluation strategy for the time-averaged quantities.  Delta mode
/// replaces the sub-picosecond correlation structures by area-preserving
/// spikes before the jitter/window averaging (fast, used for sweeps and
/// fitting); exact mode keeps the true rectangular/triangular shapes.  Both
/// reduce to closed-form piecewise polynomials and agree to better than
/// 1e-3 at the apparatus parameters.
enum class EvalMode { delta, exact };

/// Uniform detector jitter density u(t) = 1/(2 tau_d) on |t| <= tau_d.  A
/// zero half-width acts as the identity in every convolution consumer.
double jitter_kernel(const DetectorModel& d, double t);

/// Prepared evaluator for the time-averaged coherence quantities at fixed
/// source/detector/window parameters.  Builds the convolved excess shapes
/// once; evaluations are cheap after that.
class ResponseModel {
 public:
  ResponseModel(const SpdcParams& p, const DetectorModel& d,
                const CoincidenceConfig& c, EvalMode mode = EvalMode::delta);

  /// Window-averaged signal-idler coincidence rate N_si(tau).
  double n_si(double tau) const;
  /// Time-averaged coherence N_si(tau) / R(0)^2.
  double g2bar_si(double tau) const;
  /// Window-averaged triple coincidence rate N_si2(tau).
  double n2_si(double tau) const;
  /// Time-averaged conditional coherence
  /// N_si2(tau) R(0) / [N_si(0) N_si(tau)].
  double g2bar_c(double tau) const;

  const SpdcParams& params() const { return params_; }
  EvalMode mode() const { return mode_; }

 private:
  double phi_at(double tau) const;

  SpdcParams params_;
  double tau_d_ = 0.0;
  double tau_coin_ = 0.0;
  EvalMode mode_ = EvalMode::delta;
  PiecewisePoly pair_excess_;    // N_si(tau) - R^2
  PiecewisePoly auto_sq_term_;   // windowed |R(t1-t2)|^2 contribution
  PiecewisePoly jitter_box_;     // u, empty when tau_d == 0
  PiecewisePoly window_mass_;    // S(z): window-captured jitter mass
  double pair_excess_zero_ = 0.0;
  double cross_area_ = 0.0;
};

/// P_si convolved twice with the jitter kernel (no coincidence window).
/// Delta mode needs tau_d > 0; with tau_d == 0 exact mode returns
/// pair_rate_fn pointwise.
double pbar_si(const SpdcParams& p, const DetectorModel& d, double tau,
               EvalMode mode = EvalMode::exact);

double n_si(const SpdcParams& p, const DetectorModel& d,
            const CoincidenceConfig& c, double tau,
            EvalMode mode = EvalMode::delta);
double g2bar_si(const SpdcParams& p, const DetectorModel& d,
                const CoincidenceConfig& c, double tau,
                EvalMode mode = EvalMode::delta);
double n2_si(const SpdcParams& p, const DetectorModel& d,
             const CoincidenceConfig& c, double tau,
             EvalMode mode = EvalMode::delta);
double g2bar_c(const SpdcParams& p, const DetectorModel& d,
               const CoincidenceConfig& c, double tau,
               EvalMode mode = EvalMode::delta);

struct SweepPoint {
  double x = 0.0;      ///< pump power (mW) or window full width (s)
  double value = 0.0;  ///< g2bar_c(0)
};

/// g2bar_c(0) versus pump power at a fixed window.
std::vector<SweepPoint> g2bar_c_zero_power_sweep(
    double rate_per_mw, double bandwidth, const DetectorModel& d,
    const CoincidenceConfig& c, std::span<const double> powers_mw,
    EvalMode mode = EvalMode::delta);

/// g2bar_c(0) versus coincidence window full width (seconds) at fixed
/// source parameters.
std::vector<SweepPoint> g2bar_c_zero_window_sweep(
    const SpdcParams& p, const DetectorModel& d,
    std::span<const double> window_full_widths, EvalMode mode = EvalMode::delta);

}  // namespace hsps
