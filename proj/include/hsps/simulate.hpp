#pragma once

#include <array>
#include <cstdint>
#include <functional>

#include "hsps/model.hpp"
#include "hsps/response.hpp"
#include "hsps/tags.hpp"

namespace hsps {

/// Monte-Carlo source + apparatus description.  Channels: 0 idler, 1 and 2
/// the two signal arms behind the beam splitter.
struct SimConfig {
  SpdcParams source;
  std::array<DetectorModel, 3> detectors{};
  double splitter_ratio = 0.5;  ///< probability signal photon -> channel 1
  double duration = 0.0;        ///< seconds
  std::uint64_t rng_seed = 1;
  int threads = 1;
  /// generate() refuses to materialize streams above this in-memory size.
  std::uint64_t tag_budget_bytes = 4ull << 30;

  void validate() const;
  /// Expected number of detected tags.
  double expected_tags() const;
};

/// Pair emissions follow a homogeneous Poisson process; the signal-idler
/// delay is uniform on [-1/(2B), 1/(2B)] (the rectangular cross-correlation).
/// Each photon then survives its detector's Bernoulli(efficiency) thinning,
/// picks a signal arm with splitter_ratio, receives uniform +-tau_d jitter,
/// is quantized to the tag grid (floor) and passes a per-channel
/// non-paralyzable dead-time filter.  Output is time-sorted and fully
/// determined by rng_seed; generation shards the duration into fixed
/// sub-intervals with counter-seeded substreams, so the stream is identical
/// for any thread count.
///
/// Intra-beam thermal bunching between distinct pairs is not simulated: its
/// 1/B correlation width lies three orders of magnitude below the tag
/// resolution and contributes O(1/(B tau_coin)) to windowed counts.  The
/// discrete module covers that physics analytically.
TagStream generate(const SimConfig& cfg);

/// Chunked variant: sorted, dead-time-filtered chunks are handed to `sink`
/// in time order.  Concatenating the chunks reproduces generate() exactly.
void generate_stream(const SimConfig& cfg,
                     const std::function<void(const TagStream& chunk)>& sink);

/// Adds independent Poisson background tags on every channel and re-sorts.
/// Rate 0 returns the stream unchanged.  No dead-time reapplication.
TagStream inject_background(const TagStream& s, double rate_per_channel,
                            std::uint64_t seed);

}  // namespace hsps
