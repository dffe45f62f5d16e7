#include "hsps/response.hpp"

#include <cmath>
#include <string>

#include "hsps/errors.hpp"

namespace hsps {

void DetectorModel::validate() const {
  if (jitter_halfwidth < 0.0 || !std::isfinite(jitter_halfwidth))
    throw ConfigError("DetectorModel: jitter_halfwidth must be >= 0");
  if (!(efficiency > 0.0) || efficiency > 1.0)
    throw ConfigError("DetectorModel: efficiency must be in (0, 1]");
  if (dead_time < 0.0)
    throw ConfigError("DetectorModel: dead_time must be >= 0");
  if (!(tag_resolution > 0.0))
    throw ConfigError("DetectorModel: tag_resolution must be > 0");
}

void CoincidenceConfig::validate() const {
  if (!(coin_halfwidth > 0.0) || !std::isfinite(coin_halfwidth))
    throw ConfigError("CoincidenceConfig: coin_halfwidth must be > 0");
}

bool CoincidenceConfig::in_apparatus_range() const {
  return coin_halfwidth >= 0.25e-9 && coin_halfwidth <= 10e-9;
}

double jitter_kernel(const DetectorModel& d, double t) {
  d.validate();
  if (d.jitter_halfwidth == 0.0)
    throw ConfigError(
        "jitter_kernel: tau_d == 0 is a delta kernel; evaluate the "
        "convolution consumer instead");
  if (std::abs(t) <= d.jitter_halfwidth) return 0.5 / d.jitter_halfwidth;
  return 0.0;
}

namespace {

// |C(tau)|^2 as a piecewise polynomial: rectangle of height R*B on
// +-1/(2B), area exactly R.
PiecewisePoly cross_sq_shape(const SpdcParams& p) {
  return PiecewisePoly::box(0.5 / p.bandwidth, p.pair_rate * p.bandwidth);
}

// |R(tau)|^2: squared triangle, support +-1/B, peak R^2.
PiecewisePoly auto_sq_shape(const SpdcParams& p) {
  const double w = 1.0 / p.bandwidth;
  const double r2 = p.pair_rate * p.pair_rate;
  const double b = p.bandwidth;
  // (1 + u B)^2 on [-w, 0), (1 - u B)^2 on [0, w), local coordinates.
  return PiecewisePoly::from_pieces(
      {-w, 0.0, w},
      {{0.0, 0.0, r2 * b * b}, {r2, -2.0 * r2 * b, r2 * b * b}});
}

// Difference-of-two-jitters kernel K2: triangle on +-2 tau_d.
PiecewisePoly two_jitter_kernel(double tau_d) {
  return PiecewisePoly::triangle(2.0 * tau_d, 0.5 / tau_d);
}

}  // namespace

ResponseModel::ResponseModel(const SpdcParams& p, const DetectorModel& d,
                             const CoincidenceConfig& c, EvalMode mode) {
  p.validate();
  d.validate();
  c.validate();
  params_ = p;
  tau_d_ = d.jitter_halfwidth;
  tau_coin_ = c.coin_halfwidth;
  mode_ = mode;

  const double r = p.pair_rate;
  const double b = p.bandwidth;

  if (mode == EvalMode::exact) {
    PiecewisePoly xs = cross_sq_shape(p);
    PiecewisePoly d2 = auto_sq_shape(p);
    if (tau_d_ > 0.0) {
      xs = xs.box_average(tau_d_).box_average(tau_d_);
      d2 = d2.box_average(tau_d_).box_average(tau_d_);
    }
    pair_excess_ = xs.box_average(tau_coin_);
    auto_sq_term_ = d2.box_average(tau_coin_).box_average(tau_coin_);
    // 2 * integral of C(x) C(y) R(x - y) over the plane, reduced to
    // 2 * <R, C correlated with C>; (C x C)(u) is a triangle of peak R.
    const PiecewisePoly c_corr = PiecewisePoly::triangle(1.0 / b, r);
    const PiecewisePoly auto_tri = PiecewisePoly::triangle(1.0 / b, r);
    cross_area_ = 2.0 * PiecewisePoly::inner(auto_tri, c_corr);
  } else {
    // Areas of the narrow structures: |C|^2 -> R, |R|^2 -> 2 R^2 / (3B),
    // cross term -> 4 R^2 / (3B).
    const double w2 = 2.0 * r * r / (3.0 * b);
    if (tau_d_ > 0.0) {
      pair_excess_ =
          two_jitter_kernel(tau_d_).scaled(r).box_average(tau_coin_);
      auto_sq_term_ = two_jitter_kernel(tau_d_)
                          .scaled(w2)
                          .box_average(tau_coin_)
                          .box_average(tau_coin_);
    } else {
      pair_excess_ = PiecewisePoly::box(tau_coin_, r / (2.0 * tau_coin_));
      auto_sq_term_ = PiecewisePoly::box(tau_coin_, w2 / (2.0 * tau_coin_))
                          .box_average(tau_coin_);
    }
    cross_area_ = 4.0 * r * r / (3.0 * b);
  }

  if (tau_d_ > 0.0) {
    jitter_box_ = PiecewisePoly::box(tau_d_, 0.5 / tau_d_);
    window_mass_ = jitter_box_.box_average(tau_coin_).scaled(2.0 * tau_coin_);
  }
  pair_excess_zero_ = pair_excess_(0.0);
}

double ResponseModel::phi_at(double tau) const {
  const double norm = 1.0 / (4.0 * tau_coin_ * tau_coin_);
  if (tau_d_ == 0.0) return std::abs(tau) <= tau_coin_ ? norm : 0.0;
  const PiecewisePoly shifted = window_mass_.shifted(-tau);
  return norm * (jitter_box_ * window_mass_ * shifted).integral();
}

double ResponseModel::n_si(double tau) const {
  const double r = params_.pair_rate;
  return r * r + pair_excess_(tau);
}

double ResponseModel::g2bar_si(double tau) const {
  const double r = params_.pair_rate;
  return n_si(tau) / (r * r);
}

double ResponseModel::n2_si(double tau) const {
  const double r = params_.pair_rate;
  return r * r * r + r * auto_sq_term_(tau) + r * pair_excess_zero_ +
         r * pair_excess_(tau) + cross_area_ * phi_at(tau);
}

double ResponseModel::g2bar_c(double tau) const {
  const double r = params_.pair_rate;
  return n2_si(tau) * r / (n_si(0.0) * n_si(tau));
}

double pbar_si(const SpdcParams& p, const DetectorModel& d, double tau,
               EvalMode mode) {
  p.validate();
  d.validate();
  const double td = d.jitter_halfwidth;
  if (mode == EvalMode::exact) {
    PiecewisePoly xs = cross_sq_shape(p);
    if (td > 0.0) xs = xs.box_average(td).box_average(td);
    return p.pair_rate * p.pair_rate + xs(tau);
  }
  if (td == 0.0)
    throw ConfigError(
        "pbar_si: delta mode needs tau_d > 0 (the excess is a spike); use "
        "exact mode");
  return p.pair_rate * p.pair_rate +
         two_jitter_kernel(td).scaled(p.pair_rate)(tau);
}

double n_si(const SpdcParams& p, const DetectorModel& d,
            const CoincidenceConfig& c, double tau, EvalMode mode) {
  return ResponseModel(p, d, c, mode).n_si(tau);
}

double g2bar_si(const SpdcParams& p, const DetectorModel& d,
                const CoincidenceConfig& c, double tau, EvalMode mode) {
  return ResponseModel(p, d, c, mode).g2bar_si(tau);
}

double n2_si(const SpdcParams& p, const DetectorModel& d,
             const CoincidenceConfig& c, double tau, EvalMode mode) {
  return ResponseModel(p, d, c, mode).n2_si(tau);
}

double g2bar_c(const SpdcParams& p, const DetectorModel& d,
               const CoincidenceConfig& c, double tau, EvalMode mode) {
  return ResponseModel(p, d, c, mode).g2bar_c(tau);
}

std::vector<SweepPoint> g2bar_c_zero_power_sweep(
    double rate_per_mw, double bandwidth, const DetectorModel& d,
    const CoincidenceConfig& c, std::span<const double> powers_mw,
    EvalMode mode) {
  if (powers_mw.empty())
    throw ConfigError("g2bar_c_zero_power_sweep: empty power grid");
  std::vector<SweepPoint> out;
  out.reserve(powers_mw.size());
  for (double mw : powers_mw) {
    const SpdcParams p = SpdcParams::from_pump(rate_per_mw, mw, bandwidth);
    out.push_back({mw, ResponseModel(p, d, c, mode).g2bar_c(0.0)});
  }
  return out;
}

std::vector<SweepPoint> g2bar_c_zero_window_sweep(
    const SpdcParams& p, const DetectorModel& d,
    std::span<const double> window_full_widths, EvalMode mode) {
  if (window_full_widths.empty())
    throw ConfigError("g2bar_c_zero_window_sweep: empty window grid");
  std::vector<SweepPoint> out;
  out.reserve(window_full_widths.size());
  for (double w : window_full_widths) {
    CoincidenceConfig c{0.5 * w};
    out.push_back({w, ResponseModel(p, d, c, mode).g2bar_c(0.0)});
  }
  return out;
}

}  // namespace hsps
