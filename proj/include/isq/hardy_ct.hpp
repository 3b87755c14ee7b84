#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "isq/radial_core.hpp"

namespace isq {

// ---------------------------------------------------------------------------
// Sharp Hardy constants: inf of int |grad f|^2 / int |f|^2/|x|^2 per sector.

enum class HardyMode {
  sector, // one angular momentum
  full,   // min over l = 0 .. l_max
  perp,   // min over l = 1 .. l_max (the range of P-perp)
};

struct HardyTrailEntry {
  double r_min, r_max;
  std::size_t n;
  double constant;
};

struct HardyReport {
  HardyMode mode = HardyMode::sector;
  int ell = 0; // sector attaining the minimum
  double best_constant = 0.0;
  double r_min = 0.0, r_max = 0.0;
  std::size_t n = 0;
  std::vector<HardyTrailEntry> trail;
};

/// Smallest generalised eigenvalue of the sector stiffness form against the
/// weight 1/r^2 on this grid. Equals (l+1/2)^2 in the continuum limit.
double sector_hardy_constant(int ell, const RadialGrid &grid);

/// Closed form of sector_hardy_constant on a geometric grid (the reduced
/// problem is a Toeplitz matrix).
double discrete_hardy_constant(int ell, const RadialGrid &grid);

/// `levels` grids: level k widens the base domain by 10^{3k} at each end
/// with the log step held fixed, so the discrete spaces are nested and the
/// trail decreases. best_constant is the last entry.
HardyReport hardy_constant(HardyMode mode, int ell_or_lmax, const RadialGrid &base,
                           int levels = 1);

// ---------------------------------------------------------------------------
// Positivity of H + (8/9) Delta and H - 2/|x|^2 per sector.

struct PositivityGaps {
  int ell = 0;
  double gap_laplacian = 0.0; // smallest eigenvalue of H + (8/9) Delta
  double gap_potential = 0.0; // smallest eigenvalue of H - 2/|x|^2
};

PositivityGaps positivity_checks(const RadialGrid &grid, int ell);

/// Smallest eigenvalue of stiffness * (-u'') + inverse_square * u/r^2.
double smallest_form_eigenvalue(const RadialGrid &grid, double stiffness, double inverse_square);

// ---------------------------------------------------------------------------
// Combes-Thomas operators.

/// Per-sector dense operators in the symmetrised interior basis:
///   A = 1 - p^2 (T+1)^{-1/2} |x|^{-2} (T+1)^{-1/2}
///   B = i * b_imag,  b_imag = -p (T+1)^{-1/2} K (T+1)^{-1/2}
/// with K the skew discretisation of (1/r) d/dr + d/dr (1/r) in reduced
/// coordinates. b_imag is real antisymmetric, so B is Hermitian.
struct CTSector {
  int ell = 0;
  Eigen::MatrixXd a_matrix;
  Eigen::MatrixXd b_imag;
  double margin = 0.0;          // smallest eigenvalue of A
  double potential_norm = 0.0;  // || (T+1)^{-1/2} |x|^{-2} (T+1)^{-1/2} ||
  double min_singular = 0.0;    // sigma_min(A + iB)
  double asymmetry_a = 0.0;     // max |A - A^T|
  double asymmetry_b = 0.0;     // max |B - B^*|
};

struct CTOperators {
  double p = 0.0;
  std::vector<CTSector> sectors;
  double margin = 0.0; // min over sectors
};

/// Dense construction; intended for grids of a few hundred nodes.
CTOperators ct_assemble(double p, const std::vector<int> &ells, const RadialGrid &grid);

/// || (T+1)^{-1/2} |x|^{-2} (T+1)^{-1/2} || from the tridiagonal route:
/// 1 / lambda_min(D^{-1/2} (T+1) D^{-1/2}), D = |x|^{-2}. Full grid size.
double potential_norm_tridiagonal(int ell, const RadialGrid &grid);

/// Skew-symmetric matrix W^{-1/2} K W^{-1/2} of the first-order operator,
/// stored by its superdiagonal (the subdiagonal is its negative).
std::vector<double> radial_skew_superdiagonal(const RadialGrid &grid);

// ---------------------------------------------------------------------------

struct WeightedResolvent {
  double p = 0.0;
  int ell = 1;
  double norm = 0.0;
  int iterations = 0;
};

/// Largest singular value of |x|^{-1-p} (T+1)^{-1} |x|^{-1+p} on sector ell,
/// by Lanczos on N^T N with tridiagonal solves. Throws InvalidRange if ell < 1.
WeightedResolvent weighted_resolvent_norm(double p, int ell, const RadialGrid &grid);

} // namespace isq
