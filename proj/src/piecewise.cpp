#include "hsps/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hsps/errors.hpp"

namespace hsps {

namespace {

double poly_eval(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) v = v * x + c[k];
  return v;
}

// Coefficients of p(x + d) given those of p(x).
std::vector<double> poly_shift(const std::vector<double>& c, double d) {
  std::vector<double> out(c.size(), 0.0);
  for (std::size_t k = 0; k < c.size(); ++k) {
    // distribute c[k] * (x + d)^k via binomials
    double binom = 1.0;
    double dpow = 1.0;
    for (std::size_t j = k + 1; j-- > 0;) {
      out[j] += c[k] * binom * dpow;
      if (j > 0) {
        binom = binom * static_cast<double>(j) / static_cast<double>(k - j + 1);
        dpow *= d;
      }
    }
  }
  return out;
}

std::vector<double> poly_mul(const std::vector<double>& a,
                             const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

// Antiderivative with constant term zero.
std::vector<double> poly_antideriv(const std::vector<double>& c) {
  std::vector<double> out(c.size() + 1, 0.0);
  for (std::size_t k = 0; k < c.size(); ++k)
    out[k + 1] = c[k] / static_cast<double>(k + 1);
  return out;
}

}  // namespace

PiecewisePoly PiecewisePoly::box(double halfwidth, double height,
                                 double center) {
  if (!(halfwidth > 0.0)) throw ConfigError("PiecewisePoly::box: halfwidth <= 0");
  return from_pieces({center - halfwidth, center + halfwidth}, {{height}});
}

PiecewisePoly PiecewisePoly::triangle(double halfwidth, double peak,
                                      double center) {
  if (!(halfwidth > 0.0))
    throw ConfigError("PiecewisePoly::triangle: halfwidth <= 0");
  const double slope = peak / halfwidth;
  return from_pieces({center - halfwidth, center, center + halfwidth},
                     {{0.0, slope}, {peak, -slope}});
}

PiecewisePoly PiecewisePoly::from_pieces(
    std::vector<double> edges, std::vector<std::vector<double>> coeffs) {
  if (edges.size() != coeffs.size() + 1)
    throw ConfigError("PiecewisePoly: edges/coeffs size mismatch");
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    if (!(edges[i] < edges[i + 1]))
      throw ConfigError("PiecewisePoly: edges must be strictly increasing");
  PiecewisePoly p;
  p.edges_ = std::move(edges);
  p.coeffs_ = std::move(coeffs);
  p.normalize();
  return p;
}

void PiecewisePoly::normalize() {
  auto piece_is_zero = [&](std::size_t i) {
    for (double c : coeffs_[i])
      if (c != 0.0) return false;
    return true;
  };
  while (!coeffs_.empty() && piece_is_zero(0)) {
    coeffs_.erase(coeffs_.begin());
    edges_.erase(edges_.begin());
  }
  while (!coeffs_.empty() && piece_is_zero(coeffs_.size() - 1)) {
    coeffs_.pop_back();
    edges_.pop_back();
  }
  if (coeffs_.empty()) edges_.clear();
}

double PiecewisePoly::support_lo() const {
  return edges_.empty() ? 0.0 : edges_.front();
}

double PiecewisePoly::support_hi() const {
  return edges_.empty() ? 0.0 : edges_.back();
}

double PiecewisePoly::operator()(double x) const {
  if (coeffs_.empty() || x < edges_.front() || x >= edges_.back()) return 0.0;
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - edges_.begin()) - 1;
  const std::size_t piece = std::min(i, coeffs_.size() - 1);
  return poly_eval(coeffs_[piece], x - edges_[piece]);
}

double PiecewisePoly::integral() const {
  double total = 0.0;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    const auto F = poly_antideriv(coeffs_[i]);
    total += poly_eval(F, edges_[i + 1] - edges_[i]);
  }
  return total;
}

PiecewisePoly PiecewisePoly::shifted(double dx) const {
  PiecewisePoly out = *this;
  for (double& e : out.edges_) e += dx;
  return out;
}

PiecewisePoly PiecewisePoly::scaled(double s) const {
  PiecewisePoly out = *this;
  for (auto& piece : out.coeffs_)
    for (double& c : piece) c *= s;
  out.normalize();
  return out;
}

namespace {

// Merged breakpoints of two edge lists, deduplicated; near-coincident edges
// (within 1e-12 of the overall span) collapse to one.
std::vector<double> merge_edges(const std::vector<double>& a,
                                const std::vector<double>& b) {
  std::vector<double> all;
  all.reserve(a.size() + b.size());
  all.insert(all.end(), a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  if (all.empty()) return all;
  const double span = std::max(all.back() - all.front(), 1e-300);
  std::vector<double> out;
  out.push_back(all.front());
  for (double e : all)
    if (e - out.back() > 1e-12 * span) out.push_back(e);
  return out;
}

}  // namespace

PiecewisePoly operator+(const PiecewisePoly& a, const PiecewisePoly& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  const auto edges = merge_edges(a.edges_, b.edges_);
  std::vector<std::vector<double>> coeffs;
  coeffs.reserve(edges.size() - 1);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double lo = edges[i];
    const double mid = 0.5 * (lo + edges[i + 1]);
    std::vector<double> sum;
    for (const PiecewisePoly* f : {&a, &b}) {
      if (f->coeffs_.empty() || mid < f->edges_.front() ||
          mid >= f->edges_.back())
        continue;
      const auto it =
          std::upper_bound(f->edges_.begin(), f->edges_.end(), mid);
      const std::size_t j = static_cast<std::size_t>(it - f->edges_.begin()) - 1;
      auto local = poly_shift(f->coeffs_[j], lo - f->edges_[j]);
      if (local.size() > sum.size()) sum.resize(local.size(), 0.0);
      for (std::size_t k = 0; k < local.size(); ++k) sum[k] += local[k];
    }
    if (sum.empty()) sum.push_back(0.0);
    coeffs.push_back(std::move(sum));
  }
  PiecewisePoly out;
  out.edges_ = edges;
  out.coeffs_ = std::move(coeffs);
  out.normalize();
  return out;
}

PiecewisePoly operator*(const PiecewisePoly& a, const PiecewisePoly& b) {
  if (a.empty() || b.empty()) return {};
  const double lo = std::max(a.support_lo(), b.support_lo());
  const double hi = std::min(a.support_hi(), b.support_hi());
  if (!(lo < hi)) return {};
  std::vector<double> edges;
  for (double e : merge_edges(a.edges_, b.edges_))
    if (e >= lo && e <= hi) edges.push_back(e);
  if (edges.size() < 2) return {};
  std::vector<std::vector<double>> coeffs;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double left = edges[i];
    const double mid = 0.5 * (left + edges[i + 1]);
    std::vector<double> prod{1.0};
    for (const PiecewisePoly* f : {&a, &b}) {
      const auto it =
          std::upper_bound(f->edges_.begin(), f->edges_.end(), mid);
      const std::size_t j = static_cast<std::size_t>(it - f->edges_.begin()) - 1;
      prod = poly_mul(prod, poly_shift(f->coeffs_[j], left - f->edges_[j]));
    }
    coeffs.push_back(std::move(prod));
  }
  PiecewisePoly out;
  out.edges_ = std::move(edges);
  out.coeffs_ = std::move(coeffs);
  out.normalize();
  return out;
}

double PiecewisePoly::inner(const PiecewisePoly& a, const PiecewisePoly& b) {
  return (a * b).integral();
}

PiecewisePoly PiecewisePoly::box_average(double h) const {
  if (h == 0.0 || coeffs_.empty()) return *this;
  if (h < 0.0) throw ConfigError("PiecewisePoly::box_average: negative width");

  // Antiderivative F with F = 0 left of the support and F = total to the
  // right; the average is (F(x+h) - F(x-h)) / (2h).
  std::vector<std::vector<double>> F(coeffs_.size());
  double running = 0.0;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    F[i] = poly_antideriv(coeffs_[i]);
    F[i][0] = running;
    running = poly_eval(F[i], edges_[i + 1] - edges_[i]);
  }
  const double total = running;

  std::vector<double> lo_edges, hi_edges;
  for (double e : edges_) {
    lo_edges.push_back(e - h);
    hi_edges.push_back(e + h);
  }
  const auto edges = merge_edges(lo_edges, hi_edges);

  std::vector<std::vector<double>> coeffs;
  coeffs.reserve(edges.size() - 1);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    // The midpoint picks the source piece of F; no shifted edge crosses the
    // open sub-interval, so the whole sub-interval maps into that piece.
    const double left = edges[i];
    const double mid = 0.5 * (left + edges[i + 1]);
    auto pos = [&](double off) {
      const double y = mid + off;
      if (y < edges_.front()) return std::vector<double>{0.0};
      if (y >= edges_.back()) return std::vector<double>{total};
      const auto it = std::upper_bound(edges_.begin(), edges_.end(), y);
      const std::size_t j =
          static_cast<std::size_t>(it - edges_.begin()) - 1;
      // polynomial in (x - left): F[j] is in (y' - edges_[j]) with
      // y' = x + off, so shift by (left + off - edges_[j]).
      return poly_shift(F[j], left + off - edges_[j]);
    };
    auto a = pos(h);
    auto b = pos(-h);
    if (b.size() > a.size()) a.resize(b.size(), 0.0);
    for (std::size_t k = 0; k < b.size(); ++k) a[k] -= b[k];
    for (double& c : a) c /= 2.0 * h;
    coeffs.push_back(std::move(a));
  }
  PiecewisePoly out;
  out.edges_ = edges;
  out.coeffs_ = std::move(coeffs);
  out.normalize();
  return out;
}

}  // namespace hsps
