#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hsps {

/// Channel numbering used throughout: 0 = idler, 1 = signal arm 1,
/// 2 = signal arm 2.
enum Channel : std::uint8_t { kIdler = 0, kSignal1 = 1, kSignal2 = 2 };

/// Time-sorted stream of detection tags in structure-of-arrays layout.
/// Timestamps are unsigned tick counts of `resolution_fs` femtoseconds.
struct TagStream {
  std::uint64_t resolution_fs = 156250;  ///< femtoseconds per tick
  std::uint8_t n_channels = 3;
  double duration = 0.0;  ///< seconds covered by the stream
  std::vector<std::uint64_t> ticks;
  std::vector<std::uint8_t> channels;

  std::size_t size() const { return ticks.size(); }
  double resolution_s() const { return static_cast<double>(resolution_fs) * 1e-15; }

  void append(std::uint64_t tick, std::uint8_t channel) {
    ticks.push_back(tick);
    channels.push_back(channel);
  }

  /// Throws DataError unless ticks are nondecreasing, channels in range and
  /// the header sane.
  void validate() const;
};

/// Binary tag file, little-endian:
///   magic "HTAG", u32 version=1, u64 resolution_femtoseconds,
///   u8 n_channels, u64 n_tags, then n_tags * { u8 channel, u64 ticks }.
/// The format carries no duration; the loader infers
/// (last tick + 1) * resolution unless the caller overrides it.
void save_tags_binary(const TagStream& s, const std::string& path);
TagStream load_tags_binary(const std::string& path, double duration_override = 0.0);

/// Text form: `channel,ticks` CSV rows; `#`-prefixed comment lines carry
/// key=value metadata (resolution_fs, n_channels, duration_s) plus any
/// caller-supplied lines such as the config hash.
void save_tags_csv(const TagStream& s, const std::string& path,
                   const std::vector<std::string>& comments = {});
TagStream load_tags_csv(const std::string& path, double duration_override = 0.0);

/// Dispatches on the HTAG magic, falling back to CSV.
TagStream load_tags(const std::string& path, double duration_override = 0.0);

}  // namespace hsps
