#include "hsps/coincidence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "hsps/errors.hpp"

namespace hsps {

namespace {

std::int64_t floordiv(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Coincidence windows snap to 1/1024 tick so boundary membership is exact
// integer arithmetic rather than a last-ulp accident.
constexpr double kSnap = 1024.0;

double snap_ticks(double ticks) { return std::round(ticks * kSnap) / kSnap; }

char fmt_buf[64];
std::string fmt(double v) {
  std::snprintf(fmt_buf, sizeof fmt_buf, "%.17g", v);
  return fmt_buf;
}

}  // namespace

std::uint64_t Histogram1D::total() const {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

std::uint64_t& Histogram2D::at(int k1, int k2) {
  const int n = 2 * half_bins + 1;
  return counts[static_cast<std::size_t>(k1 + half_bins) *
                    static_cast<std::size_t>(n) +
                static_cast<std::size_t>(k2 + half_bins)];
}

std::uint64_t Histogram2D::at(int k1, int k2) const {
  const int n = 2 * half_bins + 1;
  return counts[static_cast<std::size_t>(k1 + half_bins) *
                    static_cast<std::size_t>(n) +
                static_cast<std::size_t>(k2 + half_bins)];
}

std::uint64_t Histogram2D::total() const {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

std::vector<double> singles(const TagStream& s) {
  s.validate();
  if (!(s.duration > 0.0)) throw DataError("singles: zero duration");
  std::vector<double> rates(s.n_channels, 0.0);
  for (auto c : s.channels) rates[c] += 1.0;
  for (auto& r : rates) r /= s.duration;
  return rates;
}

DelayHistogramAccumulator::DelayHistogramAccumulator(int channel_a,
                                                     int channel_b,
                                                     std::int64_t bin_width_ticks,
                                                     std::int64_t range_ticks)
    : ch_a_(channel_a), ch_b_(channel_b), bw_(bin_width_ticks),
      range_(range_ticks) {
  if (ch_a_ == ch_b_)
    throw ConfigError("delay histogram: channels must differ");
  if (bw_ < 1) throw ConfigError("delay histogram: bin width < 1 tick");
  if (range_ < 0) throw ConfigError("delay histogram: negative range");
  half_ = bw_ / 2;
  lo_idx_ = floordiv(-range_ + half_, bw_);
  const std::int64_t hi_idx = floordiv(range_ + half_, bw_);
  counts_.assign(static_cast<std::size_t>(hi_idx - lo_idx_ + 1), 0);
}

void DelayHistogramAccumulator::add_delay(std::int64_t d) {
  const std::int64_t idx = floordiv(d + half_, bw_) - lo_idx_;
  counts_[static_cast<std::size_t>(idx)]++;
}

void DelayHistogramAccumulator::feed(std::span<const std::uint64_t> ticks,
                                     std::span<const std::uint8_t> channels) {
  for (std::size_t i = 0; i < ticks.size(); ++i) {
    const std::uint64_t t = ticks[i];
    if (any_ && t < last_tick_)
      throw DataError("delay histogram: input not time-sorted");
    any_ = true;
    last_tick_ = t;
    const int c = channels[i];
    if (c != ch_a_ && c != ch_b_) continue;
    const std::uint64_t cutoff =
        t > static_cast<std::uint64_t>(range_) ? t - range_ : 0;
    while (!recent_a_.empty() && recent_a_.front() < cutoff)
      recent_a_.pop_front();
    while (!recent_b_.empty() && recent_b_.front() < cutoff)
      recent_b_.pop_front();
    if (c == ch_a_) {
      ++tags_a_;
      for (std::uint64_t b : recent_b_)
        add_delay(static_cast<std::int64_t>(b) - static_cast<std::int64_t>(t));
      recent_a_.push_back(t);
    } else {
      ++tags_b_;
      for (std::uint64_t a : recent_a_)
        add_delay(static_cast<std::int64_t>(t) - static_cast<std::int64_t>(a));
      recent_b_.push_back(t);
    }
  }
}

Histogram1D DelayHistogramAccumulator::finalize(
    double resolution_s, double duration,
    std::span<const std::uint64_t> channel_counts) const {
  if (!(duration > 0.0)) throw DataError("delay histogram: zero duration");
  Histogram1D h;
  h.channel_a = ch_a_;
  h.channel_b = ch_b_;
  h.bin_width_ticks = bw_;
  h.lo_edge_ticks = lo_idx_ * bw_ - half_;
  h.counts = counts_;
  h.resolution_s = resolution_s;
  h.duration = duration;
  h.tags_a = channel_counts.empty() ? tags_a_ : channel_counts[ch_a_];
  h.tags_b = channel_counts.empty() ? tags_b_ : channel_counts[ch_b_];
  h.rate_a = static_cast<double>(h.tags_a) / duration;
  h.rate_b = static_cast<double>(h.tags_b) / duration;
  return h;
}

Histogram1D DelayHistogramAccumulator::finalize(const TagStream& meta) const {
  return finalize(meta.resolution_s(), meta.duration, {});
}

Histogram1D delay_histogram(const TagStream& s, int channel_a, int channel_b,
                            double bin_width_s, double range_s) {
  const double res = s.resolution_s();
  if (bin_width_s < res * (1.0 - 1e-9))
    throw ConfigError("delay_histogram: bin width below tag resolution");
  const auto bw = static_cast<std::int64_t>(std::llround(bin_width_s / res));
  const auto range = static_cast<std::int64_t>(std::llround(range_s / res));
  DelayHistogramAccumulator acc(channel_a, channel_b, std::max<std::int64_t>(bw, 1),
                                range);
  acc.feed(s.ticks, s.channels);
  return acc.finalize(s);
}

WindowedPairAccumulator::WindowedPairAccumulator(int channel_a, int channel_b,
                                                 double tau_coin_s,
                                                 double resolution_s,
                                                 int half_bins)
    : ch_a_(channel_a), ch_b_(channel_b), half_(half_bins) {
  if (ch_a_ == ch_b_) throw ConfigError("pair windows: channels must differ");
  if (!(tau_coin_s > 0.0)) throw ConfigError("pair windows: tau_coin <= 0");
  if (half_ < 0) throw ConfigError("pair windows: negative bin count");
  tau_coin_ticks_ = snap_ticks(tau_coin_s / resolution_s);
  window_ticks_ = 2.0 * tau_coin_ticks_;
  horizon_ = static_cast<std::int64_t>(
                 std::ceil(tau_coin_ticks_ + half_ * window_ticks_)) +
             1;
  counts_.assign(static_cast<std::size_t>(2 * half_ + 1), 0);
}

void WindowedPairAccumulator::add_delay(std::int64_t d) {
  const double k = std::floor((static_cast<double>(d) + tau_coin_ticks_) /
                              window_ticks_);
  if (k < -half_ || k > half_) return;
  counts_[static_cast<std::size_t>(static_cast<int>(k) + half_)]++;
}

void WindowedPairAccumulator::feed(std::span<const std::uint64_t> ticks,
                                   std::span<const std::uint8_t> channels) {
  for (std::size_t i = 0; i < ticks.size(); ++i) {
    const std::uint64_t t = ticks[i];
    if (any_ && t < last_tick_)
      throw DataError("pair windows: input not time-sorted");
    any_ = true;
    last_tick_ = t;
    const int c = channels[i];
    if (c != ch_a_ && c != ch_b_) continue;
    const std::uint64_t cutoff =
        t > static_cast<std::uint64_t>(horizon_) ? t - horizon_ : 0;
    while (!recent_a_.empty() && recent_a_.front() < cutoff)
      recent_a_.pop_front();
    while (!recent_b_.empty() && recent_b_.front() < cutoff)
      recent_b_.pop_front();
    if (c == ch_a_) {
      for (std::uint64_t b : recent_b_)
        add_delay(static_cast<std::int64_t>(b) - static_cast<std::int64_t>(t));
      recent_a_.push_back(t);
    } else {
      for (std::uint64_t a : recent_a_)
        add_delay(static_cast<std::int64_t>(t) - static_cast<std::int64_t>(a));
      recent_b_.push_back(t);
    }
  }
}

std::uint64_t WindowedPairAccumulator::count(int k) const {
  return counts_[static_cast<std::size_t>(k + half_)];
}

TripleSurfaceAccumulator::TripleSurfaceAccumulator(double tau_coin_s,
                                                   double resolution_s,
                                                   int half_bins)
    : half_(half_bins) {
  if (!(tau_coin_s > 0.0)) throw ConfigError("triple surface: tau_coin <= 0");
  if (half_ < 0) throw ConfigError("triple surface: negative bin count");
  tau_coin_ticks_ = snap_ticks(tau_coin_s / resolution_s);
  window_ticks_ = 2.0 * tau_coin_ticks_;
  reach_ = static_cast<std::int64_t>(
               std::ceil(tau_coin_ticks_ + half_ * window_ticks_)) +
           1;
  horizon_idler_ = reach_;
  horizon_signal_ = 2 * reach_;
  const std::size_t n = static_cast<std::size_t>(2 * half_ + 1);
  counts_.assign(n * n, 0);
}

int TripleSurfaceAccumulator::window_index(std::int64_t d) const {
  const double k = std::floor((static_cast<double>(d) + tau_coin_ticks_) /
                              window_ticks_);
  if (k < -half_ || k > half_) return half_ + 1;  // sentinel: out of range
  return static_cast<int>(k);
}

void TripleSurfaceAccumulator::record(std::uint64_t ti, std::uint64_t t1,
                                      std::uint64_t t2) {
  const int k1 = window_index(static_cast<std::int64_t>(t1) -
                              static_cast<std::int64_t>(ti));
  if (k1 > half_) return;
  const int k2 = window_index(static_cast<std::int64_t>(t2) -
                              static_cast<std::int64_t>(ti));
  if (k2 > half_) return;
  const int n = 2 * half_ + 1;
  counts_[static_cast<std::size_t>(k1 + half_) * static_cast<std::size_t>(n) +
          static_cast<std::size_t>(k2 + half_)]++;
}

void TripleSurfaceAccumulator::feed(std::span<const std::uint64_t> ticks,
                                    std::span<const std::uint8_t> channels) {
  for (std::size_t i = 0; i < ticks.size(); ++i) {
    const std::uint64_t t = ticks[i];
    if (any_ && t < last_tick_)
      throw DataError("triple surface: input not time-sorted");
    any_ = true;
    last_tick_ = t;
    const int c = channels[i];
    if (c > 2) continue;
    const std::uint64_t cut_i =
        t > static_cast<std::uint64_t>(horizon_idler_) ? t - horizon_idler_ : 0;
    const std::uint64_t cut_s = t > static_cast<std::uint64_t>(horizon_signal_)
                                    ? t - horizon_signal_
                                    : 0;
    while (!recent_[0].empty() && recent_[0].front() < cut_i)
      recent_[0].pop_front();
    while (!recent_[1].empty() && recent_[1].front() < cut_s)
      recent_[1].pop_front();
    while (!recent_[2].empty() && recent_[2].front() < cut_s)
      recent_[2].pop_front();
    if (c == 0) {
      ++idler_tags_;
      for (std::uint64_t t1 : recent_[1])
        for (std::uint64_t t2 : recent_[2]) record(t, t1, t2);
    } else if (c == 1) {
      for (std::uint64_t ti : recent_[0])
        for (std::uint64_t t2 : recent_[2]) record(ti, t, t2);
    } else {
      for (std::uint64_t ti : recent_[0])
        for (std::uint64_t t1 : recent_[1]) record(ti, t1, t);
    }
    recent_[c].push_back(t);
  }
}

Histogram2D TripleSurfaceAccumulator::finalize(double resolution_s,
                                               double duration,
                                               std::uint64_t idler_tags) const {
  if (!(duration > 0.0)) throw DataError("triple surface: zero duration");
  Histogram2D h;
  h.window_s = window_ticks_ * resolution_s;
  h.half_bins = half_;
  h.counts = counts_;
  h.resolution_s = resolution_s;
  h.duration = duration;
  h.idler_tags = idler_tags ? idler_tags : idler_tags_;
  return h;
}

Histogram2D TripleSurfaceAccumulator::finalize(const TagStream& meta) const {
  return finalize(meta.resolution_s(), meta.duration, 0);
}

Histogram2D triple_surface(const TagStream& s, double tau_coin_s,
                           double range_s) {
  if (s.n_channels < 3)
    throw DataError("triple_surface: stream must carry three channels");
  const double res = s.resolution_s();
  const double w = 2.0 * tau_coin_s;
  const int half = static_cast<int>(std::floor(range_s / w));
  TripleSurfaceAccumulator acc(tau_coin_s, res, half);
  acc.feed(s.ticks, s.channels);
  return acc.finalize(s);
}

std::vector<CurvePoint> g2si_curve(const Histogram1D& h, double tau_coin_s) {
  std::vector<CurvePoint> out;
  if (h.counts.empty()) return out;
  if (!(h.rate_a > 0.0) || !(h.rate_b > 0.0))
    throw DataError("g2si_curve: zero singles rate on a channel");
  // Everything in units of 1/1024 tick for exact window membership.
  const auto bws = h.bin_width_ticks * 1024;
  const auto tcs = static_cast<std::int64_t>(
      std::llround(snap_ticks(tau_coin_s / h.resolution_s) * 1024.0));
  if (tcs <= 0) throw ConfigError("g2si_curve: window below snap resolution");
  // bin centers (scaled): c0s + i * bws
  const double c0 = h.bin_center_ticks(0);
  const auto c0s = static_cast<std::int64_t>(std::llround(c0 * 1024.0));
  // offsets of bins whose center lies in [center - tau, center + tau)
  const std::int64_t dlo = -floordiv(tcs, bws);
  const std::int64_t dhi = floordiv(tcs - 1, bws);
  std::vector<std::uint64_t> prefix(h.counts.size() + 1, 0);
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    prefix[i + 1] = prefix[i] + h.counts[i];
  const double two_tau = 2.0 * tau_coin_s;
  const double norm = 1.0 / (h.duration * two_tau * h.rate_a * h.rate_b);
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(h.counts.size());
       ++i) {
    const std::int64_t jlo = i + dlo;
    const std::int64_t jhi = i + dhi;
    if (jlo < 0 || jhi >= static_cast<std::int64_t>(h.counts.size())) continue;
    const std::uint64_t cnt = prefix[jhi + 1] - prefix[jlo];
    CurvePoint pt;
    pt.tau = (static_cast<double>(c0s + i * bws) / 1024.0) * h.resolution_s;
    pt.value = static_cast<double>(cnt) * norm;
    pt.sigma = cnt > 0 ? pt.value / std::sqrt(static_cast<double>(cnt)) : norm;
    out.push_back(pt);
  }
  return out;
}

G2cEstimator::G2cEstimator(double tau_coin_s, double resolution_s,
                           int half_bins)
    : tau_coin_s_(tau_coin_s), window_s_(2.0 * tau_coin_s), half_(half_bins),
      pair_s1_(kIdler, kSignal1, tau_coin_s, resolution_s, half_bins),
      pair_s2_(kIdler, kSignal2, tau_coin_s, resolution_s, half_bins),
      triples_(tau_coin_s, resolution_s, half_bins) {}

void G2cEstimator::feed(std::span<const std::uint64_t> ticks,
                        std::span<const std::uint8_t> channels) {
  pair_s1_.feed(ticks, channels);
  pair_s2_.feed(ticks, channels);
  triples_.feed(ticks, channels);
  for (auto c : channels) idler_tags_ += (c == kIdler) ? 1 : 0;
}

std::vector<CurvePoint> G2cEstimator::finalize() const {
  const std::uint64_t heralds = pair_s1_.count(0);
  if (heralds == 0)
    throw DataError("g2c_profile: no heralded pairs in the zero-delay window");
  const double ni = static_cast<double>(idler_tags_);
  std::vector<CurvePoint> out;
  const Histogram2D surface = triples_.finalize(1.0, 1.0, idler_tags_);
  for (int k = -half_; k <= half_; ++k) {
    const std::uint64_t p2 = pair_s2_.count(k);
    if (p2 == 0) continue;
    const std::uint64_t t3 = surface.at(0, k);
    CurvePoint pt;
    pt.tau = static_cast<double>(k) * window_s_;
    const double scale = ni / (static_cast<double>(heralds) * static_cast<double>(p2));
    pt.value = static_cast<double>(t3) * scale;
    if (t3 > 0) {
      const double rel = std::sqrt(1.0 / static_cast<double>(t3) +
                                   1.0 / static_cast<double>(heralds) +
                                   1.0 / static_cast<double>(p2) + 1.0 / ni);
      pt.sigma = pt.value * rel;
    } else {
      pt.sigma = scale;
    }
    out.push_back(pt);
  }
  return out;
}

std::vector<CurvePoint> g2c_profile(const TagStream& s, double tau_coin_s,
                                    double range_s) {
  if (s.n_channels < 3)
    throw DataError("g2c_profile: stream must carry three channels");
  const int half = static_cast<int>(std::floor(range_s / (2.0 * tau_coin_s)));
  G2cEstimator est(tau_coin_s, s.resolution_s(), half);
  est.feed(s.ticks, s.channels);
  return est.finalize();
}

namespace {

void write_comments(std::ofstream& f, std::span<const std::string> comments) {
  for (const auto& c : comments) f << "# " << c << "\n";
}

}  // namespace

void save_histogram_csv(const Histogram1D& h, const std::string& path,
                        std::span<const std::string> comments) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot open for writing: " + path);
  f << "# hsps delay histogram\n";
  write_comments(f, comments);
  f << "# channel_a=" << h.channel_a << " channel_b=" << h.channel_b << "\n";
  f << "# bin_width_ticks=" << h.bin_width_ticks
    << " resolution_s=" << fmt(h.resolution_s) << "\n";
  f << "# duration_s=" << fmt(h.duration) << " rate_a=" << fmt(h.rate_a)
    << " rate_b=" << fmt(h.rate_b) << "\n";
  f << "delay_s,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    f << fmt(h.bin_center_ticks(i) * h.resolution_s) << ',' << h.counts[i]
      << '\n';
  if (!f) throw DataError("write failed: " + path);
}

void save_histogram_csv(const Histogram2D& h, const std::string& path,
                        std::span<const std::string> comments) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot open for writing: " + path);
  f << "# hsps triple coincidence surface\n";
  write_comments(f, comments);
  f << "# window_s=" << fmt(h.window_s) << " duration_s=" << fmt(h.duration)
    << " idler_tags=" << h.idler_tags << "\n";
  f << "d1_s,d2_s,count\n";
  for (int k1 = -h.half_bins; k1 <= h.half_bins; ++k1)
    for (int k2 = -h.half_bins; k2 <= h.half_bins; ++k2)
      f << fmt(k1 * h.window_s) << ',' << fmt(k2 * h.window_s) << ','
        << h.at(k1, k2) << '\n';
  if (!f) throw DataError("write failed: " + path);
}

void save_curve_csv(std::span<const CurvePoint> curve, const std::string& path,
                    const std::string& x_name, const std::string& y_name,
                    std::span<const std::string> comments) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot open for writing: " + path);
  write_comments(f, comments);
  f << x_name << ',' << y_name << ",sigma\n";
  for (const auto& p : curve)
    f << fmt(p.tau) << ',' << fmt(p.value) << ',' << fmt(p.sigma) << '\n';
  if (!f) throw DataError("write failed: " + path);
}

}  // namespace hsps
