#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "hsps/tags.hpp"

namespace hsps {

/// 1-D delay histogram between two channels.  Bin i covers integer delays
/// d (ticks, B minus A) in [lo_edge_ticks + i*bw, lo_edge_ticks + (i+1)*bw).
struct Histogram1D {
  int channel_a = 0;
  int channel_b = 1;
  std::int64_t bin_width_ticks = 1;
  std::int64_t lo_edge_ticks = 0;
  std::vector<std::uint64_t> counts;
  // normalization metadata
  double resolution_s = 0.0;
  double duration = 0.0;
  double rate_a = 0.0;
  double rate_b = 0.0;
  std::uint64_t tags_a = 0;
  std::uint64_t tags_b = 0;

  double bin_center_ticks(std::size_t i) const {
    return static_cast<double>(lo_edge_ticks + static_cast<std::int64_t>(i) *
                                                   bin_width_ticks) +
           0.5 * static_cast<double>(bin_width_ticks - 1);
  }
  std::uint64_t total() const;
};

/// 2-D triple-coincidence surface over (t_s1 - t_i, t_s2 - t_i), binned in
/// coincidence windows of full width `window_s`; bin (k1, k2) covers delays
/// in [k*w - tau_coin, k*w + tau_coin) around each axis, k in [-half, half].
struct Histogram2D {
  double window_s = 0.0;  ///< 2 * tau_coin
  int half_bins = 0;
  std::vector<std::uint64_t> counts;  ///< (2h+1)^2, row-major in k1
  double resolution_s = 0.0;
  double duration = 0.0;
  std::uint64_t idler_tags = 0;

  std::uint64_t& at(int k1, int k2);
  std::uint64_t at(int k1, int k2) const;
  std::uint64_t total() const;
};

struct CurvePoint {
  double tau = 0.0;  ///< seconds
  double value = 0.0;
  double sigma = 0.0;
};

/// Count rate per channel (counts / duration).  Zero-duration streams are
/// an error.
std::vector<double> singles(const TagStream& s);

/// Streaming pair correlator: one forward pass over the time-sorted merge,
/// O(window occupancy) state.  Feed chunks in time order, then finalize.
class DelayHistogramAccumulator {
 public:
  DelayHistogramAccumulator(int channel_a, int channel_b,
                            std::int64_t bin_width_ticks,
                            std::int64_t range_ticks);

  void feed(std::span<const std::uint64_t> ticks,
            std::span<const std::uint8_t> channels);
  Histogram1D finalize(const TagStream& meta) const;
  Histogram1D finalize(double resolution_s, double duration,
                       std::span<const std::uint64_t> channel_counts) const;

 private:
  void add_delay(std::int64_t d);

  int ch_a_, ch_b_;
  std::int64_t bw_, range_, half_, lo_idx_;
  std::vector<std::uint64_t> counts_;
  std::deque<std::uint64_t> recent_a_, recent_b_;
  std::uint64_t last_tick_ = 0;
  bool any_ = false;
  std::uint64_t tags_a_ = 0, tags_b_ = 0;
};

Histogram1D delay_histogram(const TagStream& s, int channel_a, int channel_b,
                            double bin_width_s, double range_s);

/// Window-binned pair counts: counts[k] = pairs with delay in
/// [k*w - tau_coin, k*w + tau_coin), w = 2*tau_coin, k in [-half, half].
class WindowedPairAccumulator {
 public:
  WindowedPairAccumulator(int channel_a, int channel_b, double tau_coin_s,
                          double resolution_s, int half_bins);

  void feed(std::span<const std::uint64_t> ticks,
            std::span<const std::uint8_t> channels);
  std::uint64_t count(int k) const;

 private:
  void add_delay(std::int64_t d);

  int ch_a_, ch_b_;
  double tau_coin_ticks_, window_ticks_;
  int half_;
  std::int64_t horizon_;
  std::vector<std::uint64_t> counts_;
  std::deque<std::uint64_t> recent_a_, recent_b_;
  std::uint64_t last_tick_ = 0;
  bool any_ = false;
};

/// Streaming triple correlator over channels (idler, s1, s2).
class TripleSurfaceAccumulator {
 public:
  TripleSurfaceAccumulator(double tau_coin_s, double resolution_s,
                           int half_bins);

  void feed(std::span<const std::uint64_t> ticks,
            std::span<const std::uint8_t> channels);
  Histogram2D finalize(const TagStream& meta) const;
  Histogram2D finalize(double resolution_s, double duration,
                       std::uint64_t idler_tags) const;

 private:
  void record(std::uint64_t ti, std::uint64_t t1, std::uint64_t t2);
  int window_index(std::int64_t d) const;

  double tau_coin_ticks_, window_ticks_;
  int half_;
  std::int64_t reach_, horizon_signal_, horizon_idler_;
  std::vector<std::uint64_t> counts_;
  std::deque<std::uint64_t> recent_[3];
  std::uint64_t last_tick_ = 0;
  bool any_ = false;
  std::uint64_t idler_tags_ = 0;
};

Histogram2D triple_surface(const TagStream& s, double tau_coin_s,
                           double range_s);

/// Sliding-window estimate of the time-averaged signal-idler coherence from
/// a fine delay histogram: for each bin center tau, counts with delay in
/// [tau - tau_coin, tau + tau_coin) normalized by duration, window width and
/// the singles rates.  Only centers whose window lies fully inside the
/// histogram range are emitted.
std::vector<CurvePoint> g2si_curve(const Histogram1D& h, double tau_coin_s);

/// Streaming estimator of the conditional coherence dip
/// g2bar_c(k*w) = T(0,k) * N_i / (P_s1(0) * P_s2(k)) with Poisson errors,
/// where T is the triple surface, P the window-binned pair counts and N_i
/// the idler tag count.
class G2cEstimator {
 public:
  G2cEstimator(double tau_coin_s, double resolution_s, int half_bins);
  void feed(std::span<const std::uint64_t> ticks,
            std::span<const std::uint8_t> channels);
  std::vector<CurvePoint> finalize() const;
  const TripleSurfaceAccumulator& surface() const { return triples_; }

 private:
  double tau_coin_s_, window_s_;
  int half_;
  WindowedPairAccumulator pair_s1_, pair_s2_;
  TripleSurfaceAccumulator triples_;
  std::uint64_t idler_tags_ = 0;
};

std::vector<CurvePoint> g2c_profile(const TagStream& s, double tau_coin_s,
                                    double range_s);

/// Histogram CSV emitters; `comments` lines are written verbatim after a
/// leading '#'.
void save_histogram_csv(const Histogram1D& h, const std::string& path,
                        std::span<const std::string> comments = {});
void save_histogram_csv(const Histogram2D& h, const std::string& path,
                        std::span<const std::string> comments = {});
void save_curve_csv(std::span<const CurvePoint> curve, const std::string& path,
                    const std::string& x_name, const std::string& y_name,
                    std::span<const std::string> comments = {});

}  // namespace hsps
