#pragma once

#include <vector>

namespace hsps {

/// Compactly supported piecewise polynomial.  Piece i covers
/// [edge[i], edge[i+1]) and stores coefficients in the local coordinate
/// (x - edge[i]); the function is zero outside [edge.front(), edge.back()).
///
/// Closed under the operations the response module needs: sums, products,
/// shifts and sliding box averages, so rectangular jitter kernels and
/// coincidence windows can be applied exactly.
class PiecewisePoly {
 public:
  PiecewisePoly() = default;  // identically zero

  /// Box of the given half-width and height centred at `center`.
  static PiecewisePoly box(double halfwidth, double height,
                           double center = 0.0);
  /// Symmetric triangle, zero at center +- halfwidth, `peak` at the center.
  static PiecewisePoly triangle(double halfwidth, double peak,
                                double center = 0.0);
  /// Arbitrary pieces: edges.size() == coeffs.size() + 1, edges increasing.
  static PiecewisePoly from_pieces(std::vector<double> edges,
                                   std::vector<std::vector<double>> coeffs);

  bool empty() const { return coeffs_.empty(); }
  double support_lo() const;
  double support_hi() const;

  double operator()(double x) const;
  double integral() const;

  /// Sliding average over [x-h, x+h]; h == 0 returns *this unchanged.
  /// Equivalent to convolution with a unit-area box of half-width h.
  PiecewisePoly box_average(double h) const;

  PiecewisePoly shifted(double dx) const;
  PiecewisePoly scaled(double s) const;

  friend PiecewisePoly operator+(const PiecewisePoly& a,
                                 const PiecewisePoly& b);
  friend PiecewisePoly operator*(const PiecewisePoly& a,
                                 const PiecewisePoly& b);

  /// Integral of the product a*b over the real line.
  static double inner(const PiecewisePoly& a, const PiecewisePoly& b);

  std::size_t piece_count() const { return coeffs_.size(); }

 private:
  std::vector<double> edges_;                // size n+1 when n pieces
  std::vector<std::vector<double>> coeffs_;  // per-piece, local coordinates

  void normalize();
};

}  // namespace hsps
