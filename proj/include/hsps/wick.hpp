#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>

#include "hsps/model.hpp"

namespace hsps {

/// One positive- or negative-frequency field operator in a moment
/// expression, e.g. E_s^dag(t1).
struct FieldOp {
  bool dagger = false;
  enum class Channel : std::uint8_t { signal, idler } channel = Channel::signal;
  double time = 0.0;
};

/// Second-order moment table: returns <A B> for a pair of field operators
/// written in that order.
using PairMoment =
    std::function<std::complex<double>(const FieldOp&, const FieldOp&)>;

/// Moment table of the zero-mean Gaussian SPDC state.  Same-channel
/// normally ordered pairs give the auto-correlation envelope, cross-channel
/// phase-sensitive pairs the cross-correlation envelope; everything else
/// vanishes.  Anti-normally ordered same-channel pairs are rejected, so the
/// full operator list passed to wick_moment must be normally ordered.
PairMoment spdc_moment_table(const SpdcParams& p);

/// Gaussian moment factoring: sums the products of pair moments over all
/// complete pairings of the operator list, preserving operator order inside
/// each pair.  2n operators produce (2n-1)!! pairings; this is the
/// definition, used as an independent oracle for the closed forms in the
/// model module.  Throws ConfigError for odd-length or dagger-unbalanced
/// lists.
std::complex<double> wick_moment(const PairMoment& table,
                                 std::span<const FieldOp> ops);

}  // namespace hsps
