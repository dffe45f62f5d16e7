#include "hsps/wick.hpp"

#include <cmath>
#include <vector>

#include "hsps/errors.hpp"

namespace hsps {

PairMoment spdc_moment_table(const SpdcParams& p) {
  p.validate();
  return [p](const FieldOp& a, const FieldOp& b) -> std::complex<double> {
    const bool same_channel = a.channel == b.channel;
    if (a.dagger && !b.dagger) {
      // <E_j^dag(t) E_k(u)>
      if (!same_channel) return 0.0;
      return auto_corr(p, a.time - b.time);
    }
    if (!a.dagger && b.dagger) {
      // Anti-normal order would add the field commutator delta; the oracle
      // only accepts normally ordered lists where this never appears.
      if (same_channel)
        throw ConfigError(
            "spdc_moment_table: anti-normally ordered same-channel pair; "
            "pass a normally ordered operator list");
      return 0.0;
    }
    // <E E> or <E^dag E^dag>: phase-sensitive, cross-channel only.  Real
    // baseband envelope, so conjugation and pair order do not matter.
    if (same_channel) return 0.0;
    return std::sqrt(cross_corr_sq(p, a.time - b.time));
  };
}

namespace {

std::complex<double> pair_all(const PairMoment& table,
                              std::vector<const FieldOp*>& rest) {
  if (rest.empty()) return 1.0;
  const FieldOp* first = rest.front();
  std::complex<double> total = 0.0;
  for (std::size_t j = 1; j < rest.size(); ++j) {
    const FieldOp* partner = rest[j];
    const std::complex<double> m = table(*first, *partner);
    if (m == std::complex<double>(0.0, 0.0)) continue;
    std::vector<const FieldOp*> next;
    next.reserve(rest.size() - 2);
    for (std::size_t k = 1; k < rest.size(); ++k)
      if (k != j) next.push_back(rest[k]);
    total += m * pair_all(table, next);
  }
  return total;
}

}  // namespace

std::complex<double> wick_moment(const PairMoment& table,
                                 std::span<const FieldOp> ops) {
  if (ops.size() % 2 != 0)
    throw ConfigError("wick_moment: operator list must have even length");
  std::size_t daggers = 0;
  for (const auto& op : ops) daggers += op.dagger ? 1 : 0;
  if (daggers * 2 != ops.size())
    throw ConfigError("wick_moment: operator list must balance daggers");
  std::vector<const FieldOp*> all;
  all.reserve(ops.size());
  for (const auto& op : ops) all.push_back(&op);
  return pair_all(table, all);
}

}  // namespace hsps
