#include "hsps/model.hpp"

#include <cmath>
#include <string>

#include "hsps/errors.hpp"

namespace hsps {

SpdcParams SpdcParams::from_rate(double pair_rate, double bandwidth) {
  SpdcParams p;
  p.pair_rate = pair_rate;
  p.bandwidth = bandwidth;
  p.validate();
  return p;
}

SpdcParams SpdcParams::from_pump(double rate_per_mw, double pump_power_mw,
                                 double bandwidth) {
  SpdcParams p;
  p.rate_per_mw = rate_per_mw;
  p.pump_power_mw = pump_power_mw;
  p.pair_rate = rate_per_mw * pump_power_mw;
  p.bandwidth = bandwidth;
  p.validate();
  return p;
}

void SpdcParams::validate() const {
  if (!(pair_rate > 0.0) || !std::isfinite(pair_rate))
    throw ConfigError("SpdcParams: pair_rate must be positive, got " +
                      std::to_string(pair_rate));
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
    throw ConfigError("SpdcParams: bandwidth must be positive, got " +
                      std::to_string(bandwidth));
  if (!(pair_rate / bandwidth < kLowGainGuard))
    throw ConfigError(
        "SpdcParams: outside the low-gain regime (pair_rate/bandwidth = " +
        std::to_string(pair_rate / bandwidth) + ", limit " +
        std::to_string(kLowGainGuard) + ")");
}

double auto_corr(const SpdcParams& p, double tau) {
  p.validate();
  const double x = std::abs(tau) * p.bandwidth;
  if (x > 1.0) return 0.0;
  return p.pair_rate * (1.0 - x);
}

double cross_corr_sq(const SpdcParams& p, double tau) {
  p.validate();
  if (std::abs(tau) < 0.5 / p.bandwidth) return p.pair_rate * p.bandwidth;
  return 0.0;
}

double g2_si(const SpdcParams& p, double tau) {
  return 1.0 + cross_corr_sq(p, tau) / (p.pair_rate * p.pair_rate);
}

double pair_rate_fn(const SpdcParams& p, double tau) {
  return p.pair_rate * p.pair_rate + cross_corr_sq(p, tau);
}

namespace {

// C(tau) as a real nonnegative baseband envelope, sqrt of cross_corr_sq.
double cross_envelope(const SpdcParams& p, double tau) {
  if (std::abs(tau) < 0.5 / p.bandwidth)
    return std::sqrt(p.pair_rate * p.bandwidth);
  return 0.0;
}

}  // namespace

double triple_rate_fn(const SpdcParams& p, double t1, double t2, double ti) {
  p.validate();
  const double r0 = p.pair_rate;
  const double r12 = auto_corr(p, t1 - t2);
  const double c1 = cross_envelope(p, t1 - ti);
  const double c2 = cross_envelope(p, t2 - ti);
  return r0 * (r0 * r0 + r12 * r12 + c1 * c1 + c2 * c2) + 2.0 * c1 * c2 * r12;
}

double g2_cond(const SpdcParams& p, double t1, double t2, double ti) {
  p.validate();
  if (t1 == ti && t2 == ti) return g2_cond_at_zero(p);
  const double g1 = g2_si(p, t1 - ti);
  const double g2 = g2_si(p, t2 - ti);
  const double r0 = p.pair_rate;
  const double r12 = auto_corr(p, t1 - t2);
  const double c1 = cross_envelope(p, t1 - ti);
  const double c2 = cross_envelope(p, t2 - ti);
  return 1.0 / g1 + 1.0 / g2 + (r12 * r12 / (r0 * r0) - 1.0) / (g1 * g2) +
         2.0 * c1 * c2 * r12 / (r0 * r0 * r0 * g1 * g2);
}

double g2_cond_at_zero(const SpdcParams& p) {
  p.validate();
  const double g0 = g2_si(p, 0.0);
  return (2.0 / g0) * (2.0 - 1.0 / g0);
}

}  // namespace hsps
