#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "isq/radial_core.hpp"

namespace isq {

struct BernsteinOptions {
  RadialGrid grid = make_grid(1e-3, 60.0, 4096);
  int l_max = 32;
  double t = 1.0;
  double coupling = 0.25;
  bool projection = true; // drop the l = 0 sector
  int r_min_halvings = 1; // trail entries beyond the base grid
};

struct BernsteinTrailEntry {
  double r_min;
  std::size_t n;
  double sup;
};

struct HeatSup {
  double value = 0.0;
  double r = 0.0, rho = 0.0, cos_angle = 1.0;
  double tail_fraction = 0.0;
  bool lattice_settled = false;
  std::size_t radii = 0, angles = 0; // final lattice
  double spectral_factor = 0.0;      // max over computed eigenvalues of e^{-t l}(l+1)^2
};

struct BernsteinReport {
  double t = 1.0, coupling = 0.25;
  bool projection = true;
  HeatSup base;
  double sup = 0.0;
  std::vector<BernsteinTrailEntry> trail;
  double trail_deviation = 0.0; // max relative change from the base sup
  double spectral_factor = 0.0;
  double spectral_bound = 0.0; // sup over l >= 0 of e^{-t l}(l+1)^2; 4/e at t = 1
  // ||(H+1)^{-1}P||_{2,inf} ||e^{-tH}(H+1)^2||_{2,2} ||(H+1)^{-1}P||_{1,2};
  // only for (a = 1/4, projection) and (a = 0, no projection).
  std::optional<double> resolvent_2inf, resolvent_12, product;
  bool truncation_warning = false;
};

/// sup over a radius x radius x angle lattice of
///   |sum_l (2l+1)/(4 pi) h_l(r, rho) P_l(cos)|,
/// h_l the sector kernel of e^{-tA_l} from the spectral data. The lattice is
/// doubled in both directions until the sup moves by less than 2%.
HeatSup heat_kernel_sup(const RadialGrid &grid, int l_max, double t, double coupling, bool projection);

/// Throws InvalidRange if t <= 0 or r_min_halvings < 0.
BernsteinReport bernstein_sup(const BernsteinOptions &options = {});

/// sup_{l >= 0} e^{-t l} (l + 1)^2.
double spectral_bound(double t);

/// Same log step with r_min divided by 2^k.
RadialGrid halve_r_min(const RadialGrid &grid, int k);

} // namespace isq
