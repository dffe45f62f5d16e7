#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace hsps {

/// Dense truncated-Fock validator for the discrete-lattice closed forms: a
/// product of two-mode squeezed states over M spectral mode pairs, the
/// temporal idler mode measured with I - |0><0|, and the conditional
/// coherence of two temporal signal modes evaluated by direct state-vector
/// algebra.  Desk-scale only (dimension (cutoff+1)^(2M)); it exists to
/// check formulas, not to compute at production sizes.
class FockOracle {
 public:
  /// nu holds the per-mode squeezing amplitudes for spectral indices
  /// m = -(M-1)/2 .. (M-1)/2 in order; mu_m = sqrt(1 + |nu_m|^2).
  FockOracle(std::span<const std::complex<double>> nu, int photon_cutoff);

  double detection_probability() const;
  double g2_cd(long k, long l) const;
  double mean_photons_per_mode() const;

 private:
  using Vec = std::vector<std::complex<double>>;

  Vec apply_annihilation_mix(const Vec& in,
                             std::span<const std::complex<double>> coeff,
                             bool idler) const;
  Vec apply_creation_mix(const Vec& in,
                         std::span<const std::complex<double>> coeff,
                         bool idler) const;
  Vec signal_mode_coeffs(long k) const;
  Vec vacuum_project_idler_slot0(const Vec& in) const;

  int modes_ = 0;
  int cutoff_ = 0;
  long half_ = 0;
  std::size_t dim_ = 0;
  std::vector<std::size_t> stride_;  // 2*modes_ slots: signal then idler
  Vec state_;
  Vec heralded_;  // (I - |0><0|_{b_i0}) |psi>
};

}  // namespace hsps
