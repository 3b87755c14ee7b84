#pragma once

#include <array>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "isq/radial_core.hpp"

namespace isq {

using Point = std::array<double, 3>;

double norm(const Point &x);
double distance(const Point &x, const Point &y);
Point scale(const Point &x, double s);
/// Point at radius r on the polar axis rotated by angle theta towards +x.
Point polar_point(double r, double cos_theta);

/// Unit vector on the sphere.
class Direction {
public:
  /// Normalises v; throws DomainError for the zero vector.
  explicit Direction(const Point &v);
  const Point &vec() const { return v_; }
  double cos_theta() const { return v_[2]; }
  double phi() const;

private:
  Point v_;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes, weights;
};
GaussRule gauss_legendre(int n);

/// Product rule: Gauss-Legendre in cos(theta) times uniform azimuth.
/// Weights are those of the uniform probability measure on S^2.
struct SphereQuadrature {
  std::vector<Direction> nodes;
  std::vector<double> weights;
  int exact_degree = 0;
  int polar_count = 0;

  /// Angular spacing scale, used for the singular-configuration guard.
  double resolution() const;
};

/// Exact for all spherical harmonics of degree <= exact_degree.
SphereQuadrature make_sphere_quadrature(int exact_degree);

/// P_l(x) for l = 0..l_max.
std::vector<double> legendre_table(int l_max, double x);

/// Real spherical harmonic normalised against the probability measure, so
/// that its mean square over the sphere is 1. m < 0 selects sin(|m| phi).
double real_harmonic(int ell, int m, const Direction &w);

using PointFunction = std::function<double(const Point &)>;
using PointKernel = std::function<double(const Point &, const Point &)>;

/// Spherical mean of f over |x| = r; the value of P f at radius r.
double project_radial(const PointFunction &f, double r, const SphereQuadrature &quad);

/// k(x, y) - mean over w of k(|x| w, y): the kernel of P-perp applied in x.
/// Throws SingularConfiguration when y lies within the quadrature resolution
/// of the sphere |x'| = |x|, or x == y.
double apply_pperp_kernel(const PointKernel &k, const Point &x, const Point &y,
                          const SphereQuadrature &quad);

/// Coefficients c_{lm}(r) of f(r w) = sum c_{lm}(r) Y_{lm}(w) on every grid
/// node, for l <= l_max.
struct SectorExpansion {
  RadialGrid grid;
  int l_max = 0;
  std::map<std::pair<int, int>, std::vector<double>> coefficients;

  const std::vector<double> &at(int ell, int m) const {
    return coefficients.at({ell, m});
  }
};

SectorExpansion analyze(const PointFunction &f, const RadialGrid &grid, int l_max,
                        const SphereQuadrature &quad);

/// sum c_{lm}(|x|) Y_{lm}(x/|x|), radial interpolation by monotone cubic
/// Hermite. Throws InvalidRange outside the grid.
double synthesize(const SectorExpansion &exp, const Point &x);

/// Share of the two highest sectors in the total squared norm of the
/// expansion, and whether it exceeds the 1e-8 truncation threshold.
struct TruncationCheck {
  double tail_fraction = 0.0;
  bool warning = false;
};
TruncationCheck truncation_check(const SectorExpansion &exp);

/// Fritsch-Carlson monotone cubic interpolation of (x, y) at t.
double monotone_cubic(std::span<const double> x, std::span<const double> y, double t);

} // namespace isq
