#pragma once

#include <optional>

namespace hsps {

/// Source physics of a cw-pumped parametric down-converter in the low-gain
/// regime.  pair_rate is the photon generation rate of each beam (pairs/s),
/// bandwidth the down-conversion bandwidth (Hz).  When the source is
/// specified through a pump calibration, pair_rate = rate_per_mw * pump_mw.
///
/// All times are seconds and all rates 1/s; unit conversion happens at the
/// CLI boundary only.  Carrier frequencies never enter the numerics: the
/// correlation envelopes R(tau) and |C(tau)| are real, nonnegative and
/// baseband.
struct SpdcParams {
  double pair_rate = 0.0;      ///< R_SPDC, pairs per second
  double bandwidth = 0.0;      ///< B_SPDC, Hz
  double rate_per_mw = 0.0;    ///< pairs/(s*mW); 0 when not pump-calibrated
  double pump_power_mw = 0.0;  ///< mW; 0 when not pump-calibrated

  static SpdcParams from_rate(double pair_rate, double bandwidth);
  static SpdcParams from_pump(double rate_per_mw, double pump_power_mw,
                              double bandwidth);

  /// Throws ConfigError unless pair_rate > 0, bandwidth > 0 and the
  /// low-gain guard pair_rate/bandwidth < 1e-2 holds.  Every closed form in
  /// this module assumes the guard.
  void validate() const;

  /// Coherence window of the twin beams (seconds).
  double coherence_window() const { return 1.0 / bandwidth; }
};

inline constexpr double kLowGainGuard = 1e-2;

/// Auto-correlation envelope R(tau): triangular, R_SPDC*(1 - |tau|*B) on
/// |tau| <= 1/B, zero elsewhere.  Even in tau; R(0) = pair_rate.
double auto_corr(const SpdcParams& p, double tau);

/// |C(tau)|^2: rectangular, R*B on |tau| < 1/(2B), zero elsewhere.  Its
/// tau-integral equals pair_rate exactly.
double cross_corr_sq(const SpdcParams& p, double tau);

/// Signal-idler coherence g_si^2(tau) = 1 + |C(tau)|^2 / R(0)^2.  Always
/// >= 1; equals 1 outside the cross-correlation support.
double g2_si(const SpdcParams& p, double tau);

/// Signal-idler coincidence rate P_si(tau) = R(0)^2 + |C(tau)|^2.
double pair_rate_fn(const SpdcParams& p, double tau);

/// Multi-coincidence rate for two signal photons at t1, t2 and an idler
/// photon at ti:
///
///   R(0) [R(0)^2 + R(t1-t2)^2 + |C(t1-ti)|^2 + |C(t2-ti)|^2]
///     + 2 C(t1-ti) C(t2-ti) R(t1-t2)
///
/// Nonnegative and symmetric under t1 <-> t2.
double triple_rate_fn(const SpdcParams& p, double t1, double t2, double ti);

/// Conditional coherence of the signal beam given an idler photocount at
/// ti.  Equals g2_cond_at_zero(p) exactly when t1 == t2 == ti, tends to 1
/// for t1 = ti with t2 far away, and to 2 when both signal times coincide
/// far from the trigger (thermal statistics).
double g2_cond(const SpdcParams& p, double t1, double t2, double ti);

/// Conditional coherence at the trigger time:
///   (2 / g_si^2(0)) * (2 - 1 / g_si^2(0)),
/// which is ~ 4 R/B deep in the low-gain regime.  Value in (0, 2].
double g2_cond_at_zero(const SpdcParams& p);

}  // namespace hsps
