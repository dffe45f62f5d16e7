#include "hsps/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>
#include <vector>

#include "hsps/errors.hpp"
#include "hsps/rng.hpp"

namespace hsps {

namespace {

constexpr double kShardSeconds = 1.0 / 16.0;

struct RawTag {
  std::uint64_t tick;
  std::uint8_t channel;
  bool operator<(const RawTag& o) const {
    return tick != o.tick ? tick < o.tick : channel < o.channel;
  }
};

}  // namespace

void SimConfig::validate() const {
  source.validate();
  for (const auto& d : detectors) d.validate();
  if (!(duration > 0.0)) throw ConfigError("SimConfig: duration must be > 0");
  if (splitter_ratio < 0.0 || splitter_ratio > 1.0)
    throw ConfigError("SimConfig: splitter_ratio must be in [0, 1]");
  const double res = detectors[0].tag_resolution;
  for (const auto& d : detectors)
    if (d.tag_resolution != res)
      throw ConfigError("SimConfig: tag_resolution must match across channels");
}

double SimConfig::expected_tags() const {
  const double eta_signal = splitter_ratio * detectors[1].efficiency +
                            (1.0 - splitter_ratio) * detectors[2].efficiency;
  return source.pair_rate * duration *
         (detectors[0].efficiency + eta_signal);
}

namespace {

// Pair emissions and detections for one shard, sorted by (tick, channel).
// Detection times may spill past the shard end by at most
// 1/(2B) + max jitter.
std::vector<RawTag> generate_shard(const SimConfig& cfg, std::uint64_t shard,
                                   double t_begin, double t_end) {
  Xoshiro256pp rng(cfg.rng_seed, shard);
  const double rate = cfg.source.pair_rate;
  const double half_delay = 0.5 / cfg.source.bandwidth;
  const double res = cfg.detectors[0].tag_resolution;
  std::vector<RawTag> out;
  out.reserve(static_cast<std::size_t>(rate * (t_end - t_begin) * 1.1) + 16);

  auto detect = [&](double t_photon, int channel) {
    const DetectorModel& det = cfg.detectors[channel];
    double t = t_photon;
    if (det.jitter_halfwidth > 0.0) t += rng.uniform_pm(det.jitter_halfwidth);
    if (t < 0.0 || t >= cfg.duration) return;
    out.push_back({static_cast<std::uint64_t>(t / res),
                   static_cast<std::uint8_t>(channel)});
  };

  double t = t_begin + rng.exponential(rate);
  while (t < t_end) {
    const double delay = rng.uniform_pm(half_delay);
    if (rng.bernoulli(cfg.detectors[0].efficiency)) detect(t, 0);
    const int arm = rng.bernoulli(cfg.splitter_ratio) ? 1 : 2;
    if (rng.bernoulli(cfg.detectors[arm].efficiency)) detect(t + delay, arm);
    t += rng.exponential(rate);
  }
  std::sort(out.begin(), out.end());
  return out;
}

class DeadTimeFilter {
 public:
  explicit DeadTimeFilter(const SimConfig& cfg) {
    const double res = cfg.detectors[0].tag_resolution;
    for (int c = 0; c < 3; ++c)
      dead_ticks_[c] = static_cast<std::uint64_t>(
          std::ceil(cfg.detectors[c].dead_time / res - 1e-9));
  }

  bool accept(const RawTag& tag) {
    auto& last = last_[tag.channel];
    if (seen_[tag.channel] && tag.tick - last < dead_ticks_[tag.channel])
      return false;
    last = tag.tick;
    seen_[tag.channel] = true;
    return true;
  }

 private:
  std::uint64_t dead_ticks_[3] = {};
  std::uint64_t last_[3] = {};
  bool seen_[3] = {false, false, false};
};

}  // namespace

void generate_stream(const SimConfig& cfg,
                     const std::function<void(const TagStream& chunk)>& sink) {
  cfg.validate();
  const double res = cfg.detectors[0].tag_resolution;
  const auto n_shards = static_cast<std::uint64_t>(
      std::ceil(cfg.duration / kShardSeconds));
  const double spill =
      0.5 / cfg.source.bandwidth +
      std::max({cfg.detectors[0].jitter_halfwidth,
                cfg.detectors[1].jitter_halfwidth,
                cfg.detectors[2].jitter_halfwidth}) +
      2.0 * res;

  DeadTimeFilter dead(cfg);
  std::vector<RawTag> carry;

  auto emit = [&](std::vector<RawTag>&& shard_tags, bool last_shard,
                  double shard_end) {
    std::vector<RawTag> merged;
    merged.reserve(carry.size() + shard_tags.size());
    std::merge(carry.begin(), carry.end(), shard_tags.begin(),
               shard_tags.end(), std::back_inserter(merged));
    carry.clear();
    std::uint64_t safe_tick = ~0ull;
    if (!last_shard) {
      const double safe = (shard_end - spill) / res;
      safe_tick = safe > 0.0 ? static_cast<std::uint64_t>(safe) : 0;
    }
    TagStream chunk;
    chunk.resolution_fs =
        static_cast<std::uint64_t>(std::llround(res * 1e15));
    chunk.n_channels = 3;
    chunk.duration = cfg.duration;
    for (const RawTag& tag : merged) {
      if (tag.tick >= safe_tick) {
        carry.push_back(tag);
        continue;
      }
      if (dead.accept(tag)) chunk.append(tag.tick, tag.channel);
    }
    sink(chunk);
  };

  const int threads = std::max(1, cfg.threads);
  std::uint64_t shard = 0;
  while (shard < n_shards) {
    const auto block =
        static_cast<std::uint64_t>(std::min<std::uint64_t>(threads, n_shards - shard));
    std::vector<std::vector<RawTag>> results(block);
    if (block == 1) {
      const double b = static_cast<double>(shard) * kShardSeconds;
      const double e = std::min(cfg.duration, b + kShardSeconds);
      results[0] = generate_shard(cfg, shard, b, e);
    } else {
      std::vector<std::thread> workers;
      workers.reserve(block);
      for (std::uint64_t j = 0; j < block; ++j)
        workers.emplace_back([&, j] {
          const double b = static_cast<double>(shard + j) * kShardSeconds;
          const double e = std::min(cfg.duration, b + kShardSeconds);
          results[j] = generate_shard(cfg, shard + j, b, e);
        });
      for (auto& w : workers) w.join();
    }
    for (std::uint64_t j = 0; j < block; ++j) {
      const bool last = shard + j + 1 == n_shards;
      const double e = std::min(
          cfg.duration, static_cast<double>(shard + j + 1) * kShardSeconds);
      emit(std::move(results[j]), last, e);
    }
    shard += block;
  }
}

TagStream generate(const SimConfig& cfg) {
  cfg.validate();
  const double est_bytes = cfg.expected_tags() * 9.0 * 1.3;
  if (est_bytes > static_cast<double>(cfg.tag_budget_bytes)) {
    char msg[256];
    std::snprintf(msg, sizeof msg,
                  "generate: duration x rate needs ~%.2g bytes for ~%.2g "
                  "tags, over the %.2g-byte budget; use generate_stream or "
                  "raise tag_budget_bytes",
                  est_bytes, cfg.expected_tags(),
                  static_cast<double>(cfg.tag_budget_bytes));
    throw DataError(msg);
  }
  TagStream out;
  out.n_channels = 3;
  out.duration = cfg.duration;
  out.resolution_fs = static_cast<std::uint64_t>(
      std::llround(cfg.detectors[0].tag_resolution * 1e15));
  out.ticks.reserve(static_cast<std::size_t>(cfg.expected_tags() * 1.05));
  out.channels.reserve(out.ticks.capacity());
  generate_stream(cfg, [&](const TagStream& chunk) {
    out.ticks.insert(out.ticks.end(), chunk.ticks.begin(), chunk.ticks.end());
    out.channels.insert(out.channels.end(), chunk.channels.begin(),
                        chunk.channels.end());
  });
  return out;
}

TagStream inject_background(const TagStream& s, double rate_per_channel,
                            std::uint64_t seed) {
  s.validate();
  if (rate_per_channel < 0.0)
    throw ConfigError("inject_background: negative rate");
  if (rate_per_channel == 0.0 || !(s.duration > 0.0)) return s;
  const double res = s.resolution_s();
  std::vector<RawTag> extra;
  for (int c = 0; c < s.n_channels; ++c) {
    Xoshiro256pp rng(seed, 0x4247ull + static_cast<std::uint64_t>(c));
    double t = rng.exponential(rate_per_channel);
    while (t < s.duration) {
      extra.push_back({static_cast<std::uint64_t>(t / res),
                       static_cast<std::uint8_t>(c)});
      t += rng.exponential(rate_per_channel);
    }
  }
  std::sort(extra.begin(), extra.end());
  TagStream out;
  out.resolution_fs = s.resolution_fs;
  out.n_channels = s.n_channels;
  out.duration = s.duration;
  out.ticks.reserve(s.size() + extra.size());
  out.channels.reserve(s.size() + extra.size());
  std::size_t i = 0, j = 0;
  while (i < s.size() || j < extra.size()) {
    const bool take_old =
        j >= extra.size() || (i < s.size() && s.ticks[i] <= extra[j].tick);
    if (take_old) {
      out.append(s.ticks[i], s.channels[i]);
      ++i;
    } else {
      out.append(extra[j].tick, extra[j].channel);
      ++j;
    }
  }
  return out;
}

}  // namespace hsps
