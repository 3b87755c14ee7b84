#pragma once

#include <cstddef>
#include <numbers>
#include <vector>

#include "isq/projections.hpp"
#include "isq/radial_core.hpp"

namespace isq {

/// Order of the modified Bessel pair solving one sector of (H_a + 1) u = 0.
struct BesselOrder {
  double nu = 0.5;

  /// sqrt(ell(ell+1) - a + 1/4); throws SupercriticalCoupling if a > 1/4.
  static BesselOrder for_coupling(double a, int ell);
  /// ell + 1/2.
  static BesselOrder free_sector(int ell) { return {ell + 0.5}; }
  /// sqrt(ell(ell+1)), the a = 1/4 operator.
  static BesselOrder critical_sector(int ell);
};

/// e^{-|x-y|} / (4 pi |x-y|). Throws SingularConfiguration at x = y.
double yukawa(const Point &x, const Point &y);

/// Sector Green's function of -u'' + (nu^2 - 1/4) u / r^2 + u on (0, inf)
/// in reduced coordinates: sqrt(r< r>) I_nu(r<) K_nu(r>). Divide by r rho
/// for the three-dimensional radial kernel.
double sector_green(BesselOrder order, double r, double rho);
/// Natural log of sector_green; finite wherever the value itself underflows.
double log_sector_green(BesselOrder order, double r, double rho);
/// The same problem on [a, b] with Dirichlet ends.
double sector_green_dirichlet(BesselOrder order, double r, double rho, double a, double b);

/// sum_{l = l_lo}^{l_hi} (2l+1)/(4 pi) P_l(cos) term(l).
template <class F>
double zonal_sum(int l_lo, int l_hi, double cos_angle, F term);

// ---------------------------------------------------------------------------
// Pointwise mean-value-theorem bounds for P-perp (-Delta+1)^{-1} delta_y.

enum class MvtRegion {
  inner, // 2|x| < |y|: envelope |x| |y|^{-2} e^{-|y|/4}
  outer, // 2|y| < |x|: envelope |y| |x|^{-2} e^{-|x|/4}
};

struct MvtSample {
  MvtRegion region;
  double x_radius, y_radius, cos_angle;
  double value;    // |P-perp (-Delta+1)^{-1} delta_y (x)|
  double envelope;
  double ratio;
};

/// Throws RegionError if neither 2|x| < |y| nor 2|y| < |x|.
MvtSample mvt_bound_check(const Point &x, const Point &y, const SphereQuadrature &quad);

struct MvtSweep {
  MvtRegion region;
  std::vector<MvtSample> samples;
  double max_ratio = 0.0;
};

/// Deterministic low-discrepancy sweep: radii log-spaced over [0.05, 40],
/// radius ratio in [0.01, 0.49], cos(angle) in [-1, 1].
MvtSweep mvt_sweep(MvtRegion region, std::size_t samples, const SphereQuadrature &quad);

// ---------------------------------------------------------------------------
// ||  |x|^{-1 + sign p} P-perp (-Delta+1)^{-1} delta_y  ||_{L^2}

struct WeightedL2Options {
  int l_max = 32;
  int panel_nodes = 24; // Gauss-Legendre nodes per panel
};

struct WeightedL2 {
  double y_radius, p;
  int sign;
  double norm = 0.0;
  double region_norm_sq[3] = {0.0, 0.0, 0.0}; // 2|x|<|y|, |x|>2|y|, remainder
  double envelope = 0.0; // |y|^{sign p} min(|y|^{-1/2}, |y|^{-1})
  double ratio = 0.0;
  /// Share of the sectors l in {l_max-1, l_max} in the two outer regions.
  double tail_fraction = 0.0;
  bool truncation_warning = false;
};

/// Throws InvalidRange if |p| >= 3/2 or sign is not +-1.
WeightedL2 weighted_L2_bound(double y_radius, double p, int sign,
                             const WeightedL2Options &opt = {});

// ---------------------------------------------------------------------------
// G(z, y): kernel of P-perp ((H+1)^{-1} - (-Delta+1)^{-1}) at critical coupling.

enum class DifferenceMethod { direct, identity };

struct DifferenceValue {
  double value = 0.0;
  int sectors = 0;
  /// |last retained sector| / |value|, and whether it exceeds 1e-8.
  double tail_fraction = 0.0;
  bool truncation_warning = false;
};

/// Holds the sector operators for the finite-difference (identity) route.
class ResolventDifference {
public:
  ResolventDifference(const RadialGrid &grid, int l_max);

  const RadialGrid &grid() const { return grid_; }
  int l_max() const { return l_max_; }

  /// Direct: sector sum of the analytic Bessel kernels (H minus free).
  /// Identity: sum of the discrete terms (I) + (II) of the second-order
  /// resolvent identity, per sector, with the middle factor (H+1)^{-1}
  /// solved on the grid. Both sums run over l = 1 .. l_max.
  DifferenceValue evaluate(double z_radius, double y_radius, double cos_angle,
                           DifferenceMethod method) const;

  /// Sector l contribution to G in reduced coordinates (before the zonal
  /// factor and the 1/(z y) scaling).
  double sector_direct(int ell, double z_radius, double y_radius) const;
  double sector_identity(int ell, double z_radius, double y_radius) const;

private:
  RadialGrid grid_;
  int l_max_;
  std::vector<SectorOperator> free_, critical_;
  std::vector<double> potential_; // kappa / r^2 on all nodes, zero at the ends
};

/// Analytic-only evaluation (direct method) with sectors l = 1 .. l_max.
DifferenceValue resolvent_difference_direct(double z_radius, double y_radius, double cos_angle,
                                            int l_max);

/// (G g)(z) = integral of G(z, y) g(|y|) dy for a radial g, by the radial
/// grid quadrature times the sphere quadrature in the direction of y
/// (direct method). `magnitude` is the same integral of |G g|.
struct RadialResponse {
  double value = 0.0, magnitude = 0.0;
};
RadialResponse resolvent_difference_on_radial(double z_radius, const ScalarFunction &g,
                                              const RadialGrid &grid,
                                              const SphereQuadrature &quad, int l_max);

/// (min(z,y)/(z+y))^p (z^{-1} ^ z^{-1/2}) (y^{-1} ^ y^{-1/2}).
double difference_envelope(double z_radius, double y_radius, double p);

struct DifferenceLatticePoint {
  double z_radius, y_radius, cos_angle, value;
  std::vector<double> ratio; // one per p
};

struct DifferenceLattice {
  std::vector<double> p_values;
  std::vector<DifferenceLatticePoint> points;
  std::vector<double> max_ratio; // one per p
  bool truncation_warning = false;
};

/// Log-spaced radii in [lo, hi] (`per_axis` per axis), angles cos in
/// {1, 0, -1}. Sector cutoff per point: max(l_max, 4 max(z, y) + 32).
DifferenceLattice difference_bound_lattice(const std::vector<double> &p_values,
                                           std::size_t per_axis, int l_max, double lo = 0.01,
                                           double hi = 100.0);

// ---------------------------------------------------------------------------

template <class F>
double zonal_sum(int l_lo, int l_hi, double cos_angle, F term) {
  if (l_hi < l_lo) return 0.0;
  const auto P = legendre_table(l_hi, cos_angle);
  double s = 0.0;
  for (int l = l_lo; l <= l_hi; ++l)
    s += (2.0 * l + 1.0) * P[l] * term(l);
  return s / (4.0 * std::numbers::pi);
}

} // namespace isq
