#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "hsps/model.hpp"

namespace hsps {

bool is_prime(std::uint64_t n);

/// Mode lattice for the discrete dual bases: a time window T and spectral
/// half-bandwidth W carrying M = 2WT + 1 modes, with frequency spacing
/// df = 1/T and time spacing dt = 1/(2W).  M must be an odd prime (the
/// lattice arithmetic relies on it); suggest() adjusts T to the nearest
/// valid grid rather than silently fixing an invalid one.
struct DiscreteGrid {
  double time_window = 0.0;     ///< T, seconds
  double half_bandwidth = 0.0;  ///< W, Hz

  long half_modes() const;  ///< WT, rounded to nearest integer
  long mode_count() const { return 2 * half_modes() + 1; }
  double df() const { return 1.0 / time_window; }
  double dt() const { return 0.5 / half_bandwidth; }

  /// Throws ConfigError unless M is an odd prime >= 3, W and T positive and
  /// T*W >= 50.  Grids with T*W < 500 are accepted but flagged.
  void validate() const;
  bool coarse() const { return time_window * half_bandwidth < 500.0; }

  /// Nearest grid with prime M at the same W, preferring M >= 2WT+1.
  static DiscreteGrid suggest(double time_window, double half_bandwidth);
};

/// Bogoliubov amplitudes per mode n in [-WT, WT], stored at index n + WT.
/// Invariant |mu_n|^2 - |nu_n|^2 = 1 holds for every mode.
struct DiscreteSpectrum {
  DiscreteGrid grid;
  std::vector<std::complex<double>> mu;
  std::vector<std::complex<double>> nu;

  std::size_t index(long n) const;
  void validate() const;
  /// Arbitrary nu values (mu = sqrt(1 + |nu|^2)); used by the Fock oracle
  /// tests to probe the closed forms away from the sinc profile.
  static DiscreteSpectrum from_nu(const DiscreteGrid& g,
                                  std::span<const std::complex<double>> nu);
};

/// Low-gain SPDC profile: nu_n = sqrt(R/B) * sinc(omega_n / (2B)) sampled on
/// the lattice (signed sinc, so both correlation envelopes of the model
/// module are recovered), mu_n = sqrt(1 + nu_n^2).  W < B is an error.
DiscreteSpectrum build_spectrum(const SpdcParams& p, const DiscreteGrid& g);

/// Temporal second-order moments of the lattice modes:
///   R_n = sum_m (1 + |nu_m|^2)/M e^{ 2 pi i n m / M}
///   C_n = sum_m nu_m mu_m  /M e^{-2 pi i n m / M}
/// computed on demand per offset and cached.  R_0 is real and >= 1.
class TemporalCorrelations {
 public:
  explicit TemporalCorrelations(const DiscreteSpectrum& s);
  /// Lattice moments straight from nu amplitudes (mu derived, no grid
  /// validation); lets the Fock-oracle comparisons run on tiny lattices.
  explicit TemporalCorrelations(std::span<const std::complex<double>> nu);

  /// Offsets are M-periodic and reduce into the centered range.
  std::complex<double> R(long n) const;
  std::complex<double> C(long n) const;
  double r0() const { return r0_; }
  long half_modes() const { return half_modes_; }

 private:
  std::complex<double> dft(const std::vector<std::complex<double>>& f,
                           long n, bool positive_phase) const;

  long half_modes_ = 0;
  std::vector<std::complex<double>> one_plus_nu2_;  // 1 + |nu_m|^2
  std::vector<std::complex<double>> nu_mu_;         // nu_m mu_m
  double r0_ = 1.0;
  mutable std::unordered_map<long, std::complex<double>> r_cache_;
  mutable std::unordered_map<long, std::complex<double>> c_cache_;
};

TemporalCorrelations temporal_correlations(const DiscreteSpectrum& s);

/// Probability that the heralding detector clicks in one time slot:
/// P_det = 1 - 1/R_0, which is ~ R(0) dt in the low-gain regime.
double detection_probability(const TemporalCorrelations& tc);

/// Conditional coherence of signal slots k and l given an idler click in
/// slot 0, from the Gaussian post-measurement closed forms with
/// Q^2 = R_0 (R_0 - 1)^2.  The off-diagonal middle term shares the
/// denominator (Q^2+|C_k|^2)(Q^2+|C_l|^2) of its neighbours; with that
/// reading the form is an exact Gaussian identity at any M (the Fock
/// oracle agrees to truncation precision).  The diagonal case is evaluated
/// from the exact post-measurement moments; the commonly quoted
/// 2 - 2(2-R_0)|C_k|^4/(Q^2+|C_k|^2)^2 only holds asymptotically for
/// W >> B and both agree in that regime and converge to the continuous
/// trigger-time value as W grows.
double g2_cd(const TemporalCorrelations& tc, long k, long l);

struct ConvergenceRow {
  double half_bandwidth = 0.0;
  double time_window = 0.0;
  long mode_count = 0;
  double tw = 0.0;
  long k = 0, l = 0;
  double discrete_value = 0.0;
  double continuous_value = 0.0;
  double rel_error = 0.0;
  bool decreased = true;  ///< error smaller than the previous row's
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  bool monotone = true;  ///< false when any row failed to decrease
};

/// Tracks |g2_cd - g2_cond| at fixed physical times k0*dt0, l0*dt0 while W
/// grows; lattice indices rescale with W and each grid keeps T*B at
/// `tb_factor` (adjusted to the nearest prime M).  Non-monotone rows are
/// flagged in the output, never silently dropped.
ConvergenceTable convergence_study(const SpdcParams& p, long k0, long l0,
                                   std::span<const double> half_bandwidths,
                                   double tb_factor = 16.0);

void save_convergence_csv(const ConvergenceTable& t, const std::string& path);

}  // namespace hsps
