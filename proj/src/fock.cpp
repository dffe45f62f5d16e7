#include "hsps/fock.hpp"

#include <cmath>
#include <numbers>

#include "hsps/errors.hpp"

namespace hsps {

namespace {

double norm2(const std::vector<std::complex<double>>& v) {
  double s = 0.0;
  for (const auto& a : v) s += std::norm(a);
  return s;
}

}  // namespace

FockOracle::FockOracle(std::span<const std::complex<double>> nu,
                       int photon_cutoff) {
  modes_ = static_cast<int>(nu.size());
  cutoff_ = photon_cutoff;
  if (modes_ < 1 || modes_ % 2 == 0)
    throw ConfigError("FockOracle: mode count must be odd and positive");
  if (cutoff_ < 1) throw ConfigError("FockOracle: cutoff must be >= 1");
  half_ = (modes_ - 1) / 2;
  const int slots = 2 * modes_;
  double dim = 1.0;
  for (int i = 0; i < slots; ++i) dim *= cutoff_ + 1;
  if (dim > 2.2e6)
    throw ConfigError("FockOracle: state dimension too large; this is a "
                      "desk-scale validator");
  dim_ = static_cast<std::size_t>(dim);
  stride_.resize(slots);
  std::size_t s = 1;
  for (int i = 0; i < slots; ++i) {
    stride_[i] = s;
    s *= static_cast<std::size_t>(cutoff_ + 1);
  }

  // Product of two-mode squeezed states: signal slot j pairs idler slot
  // (modes_-1-j), i.e. spectral index -m, with amplitude nu^n / mu^{n+1}.
  state_.assign(dim_, 0.0);
  std::vector<int> occ(static_cast<std::size_t>(slots), 0);
  for (std::size_t idx = 0; idx < dim_; ++idx) {
    std::size_t rest = idx;
    for (int i = 0; i < slots; ++i) {
      occ[i] = static_cast<int>(rest % (cutoff_ + 1));
      rest /= cutoff_ + 1;
    }
    std::complex<double> amp = 1.0;
    bool ok = true;
    for (int j = 0; j < modes_ && ok; ++j) {
      const int n = occ[j];
      const int partner = occ[modes_ + (modes_ - 1 - j)];
      if (n != partner) {
        ok = false;
        break;
      }
      const double mu = std::sqrt(1.0 + std::norm(nu[j]));
      amp /= mu;
      for (int q = 0; q < n; ++q) amp *= nu[j] / mu;
    }
    if (ok) state_[idx] = amp;
  }

  heralded_ = vacuum_project_idler_slot0(state_);
  for (std::size_t i = 0; i < dim_; ++i)
    heralded_[i] = state_[i] - heralded_[i];
}

FockOracle::Vec FockOracle::apply_annihilation_mix(
    const Vec& in, std::span<const std::complex<double>> coeff,
    bool idler) const {
  Vec out(dim_, 0.0);
  const int base = idler ? modes_ : 0;
  for (int j = 0; j < modes_; ++j) {
    if (coeff[j] == std::complex<double>(0.0, 0.0)) continue;
    const std::size_t st = stride_[base + j];
    const std::size_t radix = static_cast<std::size_t>(cutoff_ + 1);
    for (std::size_t idx = 0; idx < dim_; ++idx) {
      const int n = static_cast<int>((idx / st) % radix);
      if (n == 0) continue;
      out[idx - st] += coeff[j] * std::sqrt(static_cast<double>(n)) * in[idx];
    }
  }
  return out;
}

FockOracle::Vec FockOracle::apply_creation_mix(
    const Vec& in, std::span<const std::complex<double>> coeff,
    bool idler) const {
  Vec out(dim_, 0.0);
  const int base = idler ? modes_ : 0;
  for (int j = 0; j < modes_; ++j) {
    if (coeff[j] == std::complex<double>(0.0, 0.0)) continue;
    const std::size_t st = stride_[base + j];
    const std::size_t radix = static_cast<std::size_t>(cutoff_ + 1);
    for (std::size_t idx = 0; idx < dim_; ++idx) {
      const int n = static_cast<int>((idx / st) % radix);
      if (n >= cutoff_) continue;  // truncation
      out[idx + st] += coeff[j] * std::sqrt(static_cast<double>(n + 1)) * in[idx];
    }
  }
  return out;
}

FockOracle::Vec FockOracle::signal_mode_coeffs(long k) const {
  Vec c(static_cast<std::size_t>(modes_));
  const double root = 1.0 / std::sqrt(static_cast<double>(modes_));
  for (int j = 0; j < modes_; ++j) {
    const long m = j - half_;
    const double ph = -2.0 * std::numbers::pi * static_cast<double>(k) *
                      static_cast<double>(m) / static_cast<double>(modes_);
    c[static_cast<std::size_t>(j)] =
        root * std::complex<double>(std::cos(ph), std::sin(ph));
  }
  return c;
}

FockOracle::Vec FockOracle::vacuum_project_idler_slot0(const Vec& in) const {
  // |0><0| of the temporal idler mode b_{i,0} = sum_m a_{i,m}/sqrt(M),
  // expanded as the normally ordered series sum_j (-1)^j/j! (b+)^j b^j.
  Vec idler_coeff(static_cast<std::size_t>(modes_),
                  1.0 / std::sqrt(static_cast<double>(modes_)));
  Vec result = in;
  Vec lowered = in;
  double factorial = 1.0;
  const int max_jets = modes_ * cutoff_;
  for (int j = 1; j <= max_jets; ++j) {
    lowered = apply_annihilation_mix(lowered, idler_coeff, true);
    if (norm2(lowered) == 0.0) break;
    factorial *= static_cast<double>(j);
    Vec raised = lowered;
    for (int q = 0; q < j; ++q)
      raised = apply_creation_mix(raised, idler_coeff, true);
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    for (std::size_t i = 0; i < dim_; ++i)
      result[i] += sign / factorial * raised[i];
  }
  return result;
}

double FockOracle::detection_probability() const {
  // <psi| M+ M |psi> with M = I - P_vac and P_vac a projector.
  return norm2(heralded_) /
         norm2(state_);  // state_ is normalized up to truncation
}

double FockOracle::mean_photons_per_mode() const {
  double total = 0.0;
  const std::size_t radix = static_cast<std::size_t>(cutoff_ + 1);
  for (std::size_t idx = 0; idx < dim_; ++idx) {
    if (state_[idx] == std::complex<double>(0.0, 0.0)) continue;
    std::size_t rest = idx;
    int photons = 0;
    for (int i = 0; i < 2 * modes_; ++i) {
      photons += static_cast<int>(rest % radix);
      rest /= radix;
    }
    total += std::norm(state_[idx]) * photons;
  }
  return total / (2.0 * modes_);
}

double FockOracle::g2_cd(long k, long l) const {
  const Vec ck = signal_mode_coeffs(k);
  const Vec cl = signal_mode_coeffs(l);
  const double nphi = norm2(heralded_);
  if (nphi == 0.0) throw DataError("FockOracle: heralded state is empty");
  const Vec bk = apply_annihilation_mix(heralded_, ck, false);
  const Vec bl = apply_annihilation_mix(heralded_, cl, false);
  const Vec bkl = apply_annihilation_mix(bk, cl, false);
  const double num = norm2(bkl);
  const double dk = norm2(bk);
  const double dl = norm2(bl);
  if (dk == 0.0 || dl == 0.0)
    throw DataError("FockOracle: vanishing mean photon number");
  return num * nphi / (dk * dl);
}

}  // namespace hsps
