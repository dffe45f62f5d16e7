#include "hsps/discrete.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include "hsps/errors.hpp"

namespace hsps {

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (std::uint64_t d = 3; d * d <= n; d += 2)
    if (n % d == 0) return false;
  return true;
}

long DiscreteGrid::half_modes() const {
  return static_cast<long>(std::llround(time_window * half_bandwidth));
}

void DiscreteGrid::validate() const {
  if (!(time_window > 0.0) || !(half_bandwidth > 0.0))
    throw ConfigError("DiscreteGrid: T and W must be positive");
  const double tw = time_window * half_bandwidth;
  if (std::abs(tw - std::round(tw)) > 1e-6 * std::max(1.0, tw))
    throw ConfigError("DiscreteGrid: 2WT+1 must be integer (got WT = " +
                      std::to_string(tw) + ")");
  if (tw < 50.0)
    throw ConfigError("DiscreteGrid: T*W must be >= 50 for the lattice "
                      "approximations to hold");
  const long m = mode_count();
  if (m < 3 || !is_prime(static_cast<std::uint64_t>(m)))
    throw ConfigError("DiscreteGrid: M = " + std::to_string(m) +
                      " must be an odd prime >= 3; use DiscreteGrid::suggest");
}

DiscreteGrid DiscreteGrid::suggest(double time_window, double half_bandwidth) {
  if (!(time_window > 0.0) || !(half_bandwidth > 0.0))
    throw ConfigError("DiscreteGrid::suggest: T and W must be positive");
  const auto wt =
      static_cast<std::uint64_t>(std::llround(time_window * half_bandwidth));
  std::uint64_t m = 2 * std::max<std::uint64_t>(wt, 50) + 1;
  while (!is_prime(m)) m += 2;
  DiscreteGrid g;
  g.half_bandwidth = half_bandwidth;
  g.time_window = static_cast<double>((m - 1) / 2) / half_bandwidth;
  return g;
}

std::size_t DiscreteSpectrum::index(long n) const {
  const long wt = grid.half_modes();
  if (n < -wt || n > wt)
    throw ConfigError("DiscreteSpectrum: mode index out of range");
  return static_cast<std::size_t>(n + wt);
}

void DiscreteSpectrum::validate() const {
  grid.validate();
  const auto m = static_cast<std::size_t>(grid.mode_count());
  if (mu.size() != m || nu.size() != m)
    throw ConfigError("DiscreteSpectrum: wrong mode array length");
  for (std::size_t i = 0; i < m; ++i) {
    const double c = std::norm(mu[i]) - std::norm(nu[i]);
    if (std::abs(c - 1.0) > 1e-12)
      throw ConfigError(
          "DiscreteSpectrum: |mu|^2 - |nu|^2 = 1 violated at mode " +
          std::to_string(static_cast<long>(i) - grid.half_modes()));
  }
}

DiscreteSpectrum DiscreteSpectrum::from_nu(
    const DiscreteGrid& g, std::span<const std::complex<double>> nu) {
  g.validate();
  if (nu.size() != static_cast<std::size_t>(g.mode_count()))
    throw ConfigError("DiscreteSpectrum::from_nu: wrong length");
  DiscreteSpectrum s;
  s.grid = g;
  s.nu.assign(nu.begin(), nu.end());
  s.mu.reserve(nu.size());
  for (const auto& v : nu) s.mu.emplace_back(std::sqrt(1.0 + std::norm(v)));
  return s;
}

DiscreteSpectrum build_spectrum(const SpdcParams& p, const DiscreteGrid& g) {
  p.validate();
  g.validate();
  if (g.half_bandwidth < p.bandwidth)
    throw ConfigError("build_spectrum: W must be >= B_SPDC");
  const long wt = g.half_modes();
  const double amp = std::sqrt(p.pair_rate / p.bandwidth);
  std::vector<std::complex<double>> nu;
  nu.reserve(static_cast<std::size_t>(g.mode_count()));
  for (long n = -wt; n <= wt; ++n) {
    const double omega = 2.0 * std::numbers::pi * static_cast<double>(n) * g.df();
    const double x = omega / (2.0 * p.bandwidth);
    const double sinc = x == 0.0 ? 1.0 : std::sin(x) / x;
    nu.emplace_back(amp * sinc);
  }
  return DiscreteSpectrum::from_nu(g, nu);
}

TemporalCorrelations::TemporalCorrelations(const DiscreteSpectrum& s) {
  s.validate();
  half_modes_ = s.grid.half_modes();
  const auto m = static_cast<std::size_t>(s.grid.mode_count());
  one_plus_nu2_.resize(m);
  nu_mu_.resize(m);
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    one_plus_nu2_[i] = 1.0 + std::norm(s.nu[i]);
    nu_mu_[i] = s.nu[i] * s.mu[i];
    acc += std::norm(s.nu[i]);
  }
  r0_ = 1.0 + acc / static_cast<double>(m);
}

TemporalCorrelations::TemporalCorrelations(
    std::span<const std::complex<double>> nu) {
  const std::size_t m = nu.size();
  if (m < 1 || m % 2 == 0)
    throw ConfigError("TemporalCorrelations: mode count must be odd");
  half_modes_ = static_cast<long>((m - 1) / 2);
  one_plus_nu2_.resize(m);
  nu_mu_.resize(m);
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    one_plus_nu2_[i] = 1.0 + std::norm(nu[i]);
    nu_mu_[i] = nu[i] * std::sqrt(1.0 + std::norm(nu[i]));
    acc += std::norm(nu[i]);
  }
  r0_ = 1.0 + acc / static_cast<double>(m);
}

std::complex<double> TemporalCorrelations::dft(
    const std::vector<std::complex<double>>& f, long n,
    bool positive_phase) const {
  const long m = 2 * half_modes_ + 1;
  const double sign = positive_phase ? 1.0 : -1.0;
  const double step =
      sign * 2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(m);
  std::complex<double> sum = 0.0;
  for (long j = -half_modes_; j <= half_modes_; ++j) {
    const double ph = step * static_cast<double>(j);
    sum += f[static_cast<std::size_t>(j + half_modes_)] *
           std::complex<double>(std::cos(ph), std::sin(ph));
  }
  return sum / static_cast<double>(m);
}

namespace {

// Lattice offsets are M-periodic; reduce into the centered range.
long reduce_mod(long n, long m) {
  long r = n % m;
  if (r > (m - 1) / 2) r -= m;
  if (r < -(m - 1) / 2) r += m;
  return r;
}

}  // namespace

std::complex<double> TemporalCorrelations::R(long n) const {
  n = reduce_mod(n, 2 * half_modes_ + 1);
  if (n == 0) return r0_;
  auto it = r_cache_.find(n);
  if (it != r_cache_.end()) return it->second;
  const auto v = dft(one_plus_nu2_, n, true);
  r_cache_.emplace(n, v);
  return v;
}

std::complex<double> TemporalCorrelations::C(long n) const {
  n = reduce_mod(n, 2 * half_modes_ + 1);
  auto it = c_cache_.find(n);
  if (it != c_cache_.end()) return it->second;
  const auto v = dft(nu_mu_, n, false);
  c_cache_.emplace(n, v);
  return v;
}

TemporalCorrelations temporal_correlations(const DiscreteSpectrum& s) {
  return TemporalCorrelations(s);
}

double detection_probability(const TemporalCorrelations& tc) {
  return 1.0 - 1.0 / tc.r0();
}

double g2_cd(const TemporalCorrelations& tc, long k, long l) {
  const long m = 2 * tc.half_modes() + 1;
  if (k < -tc.half_modes() || k > tc.half_modes() || l < -tc.half_modes() ||
      l > tc.half_modes())
    throw ConfigError("g2_cd: slot index outside the lattice");
  if (std::labs(k - l) >= m)
    throw ConfigError("g2_cd: |k - l| must be < M");
  const double r0 = tc.r0();
  const double w = 1.0 / r0;           // vacuum weight of the idler slot
  const double nbar = r0 - 1.0;        // photons per temporal mode
  const double ck2 = std::norm(tc.C(k));
  if (k == l) {
    // Exact Gaussian post-measurement moments: conditioning the heralded
    // state on the idler-vacuum complement leaves a thermal signal slot of
    // occupation mbar inside the unheralded background.
    const double mbar = nbar - w * ck2;
    const double denom = nbar - w * mbar;
    return 2.0 * (1.0 - w) * (nbar * nbar - w * mbar * mbar) / (denom * denom);
  }
  // Off-diagonal closed form with Q^2 = R_0 (R_0-1)^2; all three numerator
  // terms share the denominator (Q^2+|C_k|^2)(Q^2+|C_l|^2), which the Fock
  // oracle confirms exactly.
  const double q2 = r0 * nbar * nbar;
  const double cl2 = std::norm(tc.C(l));
  const std::complex<double> rkl = tc.R(k - l);
  const double cross =
      2.0 * r0 * nbar * std::real(tc.C(k) * std::conj(tc.C(l)) * rkl);
  const double numerator = q2 * (q2 + r0 * std::norm(rkl) + ck2 + cl2) +
                           cross - 2.0 * nbar * ck2 * cl2;
  return numerator / ((q2 + ck2) * (q2 + cl2));
}

ConvergenceTable convergence_study(const SpdcParams& p, long k0, long l0,
                                   std::span<const double> half_bandwidths,
                                   double tb_factor) {
  p.validate();
  if (half_bandwidths.empty())
    throw ConfigError("convergence_study: empty W grid");
  ConvergenceTable table;
  const double w_first = half_bandwidths.front();
  double prev_error = 0.0;
  for (std::size_t i = 0; i < half_bandwidths.size(); ++i) {
    const double w = half_bandwidths[i];
    const DiscreteGrid grid =
        DiscreteGrid::suggest(tb_factor / p.bandwidth, w);
    const DiscreteSpectrum spec = build_spectrum(p, grid);
    const TemporalCorrelations tc(spec);
    const double scale = w / w_first;
    const long k = static_cast<long>(std::llround(static_cast<double>(k0) * scale));
    const long l = static_cast<long>(std::llround(static_cast<double>(l0) * scale));
    ConvergenceRow row;
    row.half_bandwidth = w;
    row.time_window = grid.time_window;
    row.mode_count = grid.mode_count();
    row.tw = grid.time_window * w;
    row.k = k;
    row.l = l;
    row.discrete_value = g2_cd(tc, k, l);
    const double t1 = static_cast<double>(k) * grid.dt();
    const double t2 = static_cast<double>(l) * grid.dt();
    row.continuous_value = g2_cond(p, t1, t2, 0.0);
    row.rel_error = std::abs(row.discrete_value - row.continuous_value) /
                    std::abs(row.continuous_value);
    row.decreased = i == 0 || row.rel_error < prev_error;
    if (i > 0 && !row.decreased) table.monotone = false;
    prev_error = row.rel_error;
    table.rows.push_back(row);
  }
  return table;
}

void save_convergence_csv(const ConvergenceTable& t, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot open for writing: " + path);
  f << "# hsps discrete-lattice convergence study\n";
  f << "# monotone=" << (t.monotone ? 1 : 0) << "\n";
  f << "W_hz,T_s,M,TW,k,l,g2_cd,g2_cond,rel_error,decreased\n";
  char buf[256];
  for (const auto& r : t.rows) {
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%ld,%.17g,%ld,%ld,%.17g,%.17g,%.17g,%d\n",
                  r.half_bandwidth, r.time_window, r.mode_count, r.tw, r.k,
                  r.l, r.discrete_value, r.continuous_value, r.rel_error,
                  r.decreased ? 1 : 0);
    f << buf;
  }
  if (!f) throw DataError("write failed: " + path);
}

}  // namespace hsps
