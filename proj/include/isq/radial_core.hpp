#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "isq/tridiagonal.hpp"

namespace isq {

/// Log-uniform grid on [r_min, r_max] with trapezoidal weights.
///
/// Radial vectors in this library are always indexed by grid node (length n).
/// Sector operators act on the n - 2 interior nodes; the two end nodes carry
/// the Dirichlet condition and are zero in every operator output.
class RadialGrid {
public:
  double r_min() const { return r_min_; }
  double r_max() const { return r_max_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t interior_size() const { return nodes_.size() - 2; }
  /// Constant spacing in log r.
  double log_step() const { return log_step_; }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }
  double node(std::size_t i) const { return nodes_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }

  /// Scale factor applied to every inverse-square coefficient,
  /// 4 tanh(h/4) / sinh(h). It makes the discrete one-dimensional Hardy
  /// inequality hold with the sharp constant 1/4 on any geometric grid.
  double hardy_scale() const;

  /// Index of the last node <= r (clamped to [0, n-2]).
  std::size_t locate(double r) const;

  friend RadialGrid make_grid(double r_min, double r_max, std::size_t n);

private:
  double r_min_ = 0.0, r_max_ = 0.0, log_step_ = 0.0;
  std::vector<double> nodes_, weights_;
};

/// Throws InvalidRange unless 0 < r_min < r_max and n >= 16.
RadialGrid make_grid(double r_min, double r_max, std::size_t n);

/// Quadrature sum of values[i] * weights[i].
double integrate(const RadialGrid &grid, std::span<const double> values);

/// One angular sector of H_a = -Delta - a/|x|^2 in reduced coordinates
/// u = r f: the operator -u'' + (ell(ell+1) - a) u / r^2 with Dirichlet ends.
///
/// `matrix` is the weight-symmetrised form W^{1/2} A W^{-1/2} acting on the
/// interior nodes, so that it is a symmetric tridiagonal matrix.
struct SectorOperator {
  double coupling = 0.0;
  int ell = 0;
  double coefficient = 0.0;     // ell(ell+1) - a
  bool critical_radial = false; // a = 1/4, ell = 0
  RadialGrid grid;
  SymTridiag matrix;
};

/// Throws SupercriticalCoupling if a > 1/4, InvalidRange if ell < 0.
SectorOperator assemble_sector(double a, int ell, const RadialGrid &grid);

/// Symmetrised tridiagonal matrix of the form
///   stiffness * (-u'') + inverse_square * u / r^2
/// on the interior nodes. Building block shared by the sector operator and
/// the auxiliary quadratic forms of the Hardy and positivity checks.
SymTridiag assemble_radial_form(const RadialGrid &grid, double stiffness,
                                double inverse_square);

/// Discrete multiplication by |x|^power on the interior nodes. Consistent
/// with the inverse-square term: radial_power(-1)^2 equals the potential
/// weight used by assemble_radial_form.
std::vector<double> radial_power(const RadialGrid &grid, double power);

/// Eigenpairs of a SectorOperator. `vectors` holds the symmetric-form
/// eigenvectors (Euclidean-orthonormal); the reduced-coordinate eigenvectors
/// W^{-1/2} y are orthonormal in the grid quadrature.
struct SpectralData {
  RadialGrid grid;
  int ell = 0;
  double coupling = 0.0;
  std::vector<double> eigenvalues;
  Eigen::MatrixXd vectors;
  bool complete = true; // false when only part of the spectrum was computed

  std::size_t count() const { return eigenvalues.size(); }
  /// Eigenvector k in reduced coordinates on all n grid nodes.
  std::vector<double> eigenvector(std::size_t k) const;
};

SpectralData decompose(const SectorOperator &op);
/// Eigenpairs with eigenvalue <= max_eigenvalue only.
SpectralData decompose_below(const SectorOperator &op, double max_eigenvalue);

using ScalarFunction = std::function<double(double)>;

/// sum_k phi(lambda_k) <v_k, v>_w v_k. Throws DomainError if phi is not
/// finite at some eigenvalue. On partial spectral data the result is the
/// functional calculus of the computed spectral subspace only.
std::vector<double> apply_function(const SpectralData &spec, const ScalarFunction &phi,
                                   std::span<const double> v);

/// (A + shift)^{-1} v in reduced coordinates by a direct tridiagonal solve.
std::vector<double> apply_resolvent(const SectorOperator &op, double shift,
                                    std::span<const double> v);

/// A v in reduced coordinates.
std::vector<double> apply_operator(const SectorOperator &op, std::span<const double> v);

/// Reduced-coordinate vector approximating delta at r: hat-function
/// weights spread over the two neighbouring nodes, divided by the quadrature
/// weights, so that <delta_r, u>_w equals the linear interpolant of u at r.
std::vector<double> point_source(const RadialGrid &grid, double r);

/// Linear interpolation of a radial vector at r.
double interpolate(const RadialGrid &grid, std::span<const double> v, double r);

/// Sampled two-point kernel. `values(i, j)` is the kernel at
/// (nodes[index[i]], nodes[index[j]]).
struct KernelTable {
  RadialGrid grid;
  std::vector<std::size_t> index;
  Eigen::MatrixXd values;
  int ell_lo = 0, ell_hi = 0;
  std::optional<double> cos_angle;

  double r(std::size_t i) const { return grid.node(index[i]); }
};

/// All interior nodes.
std::vector<std::size_t> interior_indices(const RadialGrid &grid);
/// Interior nodes at least `margin` nodes from each end, every `stride`-th.
std::vector<std::size_t> sampled_indices(const RadialGrid &grid, std::size_t margin,
                                         std::size_t stride);

/// K(r_i, r_j) = sum_k phi(lambda_k) v_k(r_i) v_k(r_j) / (r_i r_j), the
/// three-dimensional sector kernel of phi(A).
KernelTable sector_kernel(const SpectralData &spec, const ScalarFunction &phi,
                          std::vector<std::size_t> index);
KernelTable sector_kernel(const SpectralData &spec, const ScalarFunction &phi);

/// Writes r, rho, value rows.
void write_csv(const KernelTable &table, std::ostream &os);

} // namespace isq
