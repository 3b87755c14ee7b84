#include "isq/radial_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "isq/error.hpp"

namespace isq {

RadialGrid make_grid(double r_min, double r_max, std::size_t n) {
  if (!(r_min > 0.0) || !(r_max > r_min) || !std::isfinite(r_max))
    throw InvalidRange("make_grid: need 0 < r_min < r_max");
  if (n < 16) throw InvalidRange("make_grid: need at least 16 nodes");

  RadialGrid g;
  g.r_min_ = r_min;
  g.r_max_ = r_max;
  g.log_step_ = std::log(r_max / r_min) / static_cast<double>(n - 1);
  g.nodes_.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    g.nodes_[i] = r_min * std::exp(g.log_step_ * static_cast<double>(i));
  g.nodes_.front() = r_min;
  g.nodes_.back() = r_max;

  g.weights_.resize(n);
  g.weights_[0] = 0.5 * (g.nodes_[1] - g.nodes_[0]);
  for (std::size_t i = 1; i + 1 < n; ++i)
    g.weights_[i] = 0.5 * (g.nodes_[i + 1] - g.nodes_[i - 1]);
  g.weights_[n - 1] = 0.5 * (g.nodes_[n - 1] - g.nodes_[n - 2]);
  return g;
}

double RadialGrid::hardy_scale() const {
  const double h = log_step_;
  return 4.0 * std::tanh(0.25 * h) / std::sinh(h);
}

std::size_t RadialGrid::locate(double r) const {
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r);
  std::size_t j = it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
  return std::min(j, nodes_.size() - 2);
}

double integrate(const RadialGrid &grid, std::span<const double> values) {
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) s += grid.weight(i) * values[i];
  return s;
}

SymTridiag assemble_radial_form(const RadialGrid &grid, double stiffness,
                                double inverse_square) {
  const auto r = grid.nodes();
  const auto w = grid.weights();
  const double kappa = grid.hardy_scale();
  const std::size_t m = grid.interior_size();
  SymTridiag t;
  t.diag.resize(m);
  t.off.resize(m - 1);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t i = k + 1;
    const double hl = r[i] - r[i - 1];
    const double hr = r[i + 1] - r[i];
    t.diag[k] = stiffness * (1.0 / hl + 1.0 / hr) / w[i] +
                inverse_square * kappa / (r[i] * r[i]);
    if (k + 1 < m) t.off[k] = -stiffness / (hr * std::sqrt(w[i] * w[i + 1]));
  }
  return t;
}

std::vector<double> radial_power(const RadialGrid &grid, double power) {
  const double kappa = grid.hardy_scale();
  std::vector<double> out(grid.interior_size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = std::pow(grid.node(k + 1), power) * std::pow(kappa, -0.5 * power);
  return out;
}

SectorOperator assemble_sector(double a, int ell, const RadialGrid &grid) {
  if (a > 0.25) throw SupercriticalCoupling("assemble_sector: coupling a > 1/4");
  if (ell < 0) throw InvalidRange("assemble_sector: ell must be nonnegative");
  SectorOperator op;
  op.coupling = a;
  op.ell = ell;
  op.coefficient = static_cast<double>(ell) * (ell + 1) - a;
  op.critical_radial = (a == 0.25 && ell == 0);
  op.grid = grid;
  op.matrix = assemble_radial_form(grid, 1.0, op.coefficient);
  return op;
}

std::vector<double> SpectralData::eigenvector(std::size_t k) const {
  std::vector<double> u(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.interior_size(); ++i)
    u[i + 1] = vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) /
               std::sqrt(grid.weight(i + 1));
  return u;
}

namespace {

SpectralData from_eigen(const SectorOperator &op, TridiagEigen eig, bool complete) {
  SpectralData s;
  s.grid = op.grid;
  s.ell = op.ell;
  s.coupling = op.coupling;
  s.eigenvalues = std::move(eig.values);
  s.vectors = std::move(eig.vectors);
  s.complete = complete;
  return s;
}

} // namespace

SpectralData decompose(const SectorOperator &op) {
  return from_eigen(op, tridiagonal_eigen(op.matrix, true), true);
}

SpectralData decompose_below(const SectorOperator &op, double max_eigenvalue) {
  auto eig = tridiagonal_eigen(op.matrix, true,
                               SpectrumSelection::values(-1e300, max_eigenvalue));
  const bool complete = eig.values.size() == op.matrix.size();
  return from_eigen(op, std::move(eig), complete);
}

std::vector<double> apply_function(const SpectralData &spec, const ScalarFunction &phi,
                                   std::span<const double> v) {
  const std::size_t m = spec.grid.interior_size();
  Eigen::VectorXd y(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i)
    y[static_cast<Eigen::Index>(i)] = std::sqrt(spec.grid.weight(i + 1)) * v[i + 1];
  Eigen::VectorXd c = spec.vectors.transpose() * y;
  for (std::size_t k = 0; k < spec.count(); ++k) {
    const double f = phi(spec.eigenvalues[k]);
    if (!std::isfinite(f))
      throw DomainError("apply_function: function undefined at eigenvalue index " +
                        std::to_string(k));
    c[static_cast<Eigen::Index>(k)] *= f;
  }
  y = spec.vectors * c;
  std::vector<double> out(spec.grid.size(), 0.0);
  for (std::size_t i = 0; i < m; ++i)
    out[i + 1] = y[static_cast<Eigen::Index>(i)] / std::sqrt(spec.grid.weight(i + 1));
  return out;
}

std::vector<double> apply_resolvent(const SectorOperator &op, double shift,
                                    std::span<const double> v) {
  const std::size_t m = op.grid.interior_size();
  std::vector<double> y(m);
  for (std::size_t i = 0; i < m; ++i) y[i] = std::sqrt(op.grid.weight(i + 1)) * v[i + 1];
  y = solve_shifted(op.matrix, shift, y);
  std::vector<double> out(op.grid.size(), 0.0);
  for (std::size_t i = 0; i < m; ++i) out[i + 1] = y[i] / std::sqrt(op.grid.weight(i + 1));
  return out;
}

std::vector<double> apply_operator(const SectorOperator &op, std::span<const double> v) {
  const std::size_t m = op.grid.interior_size();
  std::vector<double> y(m);
  for (std::size_t i = 0; i < m; ++i) y[i] = std::sqrt(op.grid.weight(i + 1)) * v[i + 1];
  y = multiply(op.matrix, y);
  std::vector<double> out(op.grid.size(), 0.0);
  for (std::size_t i = 0; i < m; ++i) out[i + 1] = y[i] / std::sqrt(op.grid.weight(i + 1));
  return out;
}

std::vector<double> point_source(const RadialGrid &grid, double r) {
  if (r < grid.r_min() || r > grid.r_max())
    throw InvalidRange("point_source: radius outside grid");
  const std::size_t j = grid.locate(r);
  const double t = (r - grid.node(j)) / (grid.node(j + 1) - grid.node(j));
  std::vector<double> v(grid.size(), 0.0);
  v[j] = (1.0 - t) / grid.weight(j);
  v[j + 1] = t / grid.weight(j + 1);
  return v;
}

double interpolate(const RadialGrid &grid, std::span<const double> v, double r) {
  if (r < grid.r_min() || r > grid.r_max())
    throw InvalidRange("interpolate: radius outside grid");
  const std::size_t j = grid.locate(r);
  const double t = (r - grid.node(j)) / (grid.node(j + 1) - grid.node(j));
  return (1.0 - t) * v[j] + t * v[j + 1];
}

std::vector<std::size_t> interior_indices(const RadialGrid &grid) {
  return sampled_indices(grid, 1, 1);
}

std::vector<std::size_t> sampled_indices(const RadialGrid &grid, std::size_t margin,
                                         std::size_t stride) {
  margin = std::max<std::size_t>(margin, 1);
  stride = std::max<std::size_t>(stride, 1);
  std::vector<std::size_t> idx;
  for (std::size_t i = margin; i + margin < grid.size(); i += stride) idx.push_back(i);
  return idx;
}

KernelTable sector_kernel(const SpectralData &spec, const ScalarFunction &phi,
                          std::vector<std::size_t> index) {
  const auto rows = static_cast<Eigen::Index>(index.size());
  const auto cols = static_cast<Eigen::Index>(spec.count());
  Eigen::MatrixXd sub(rows, cols);
  for (Eigen::Index a = 0; a < rows; ++a) {
    const std::size_t i = index[static_cast<std::size_t>(a)];
    if (i == 0 || i + 1 >= spec.grid.size())
      throw InvalidRange("sector_kernel: boundary node requested");
    const double scale = 1.0 / (std::sqrt(spec.grid.weight(i)) * spec.grid.node(i));
    sub.row(a) = spec.vectors.row(static_cast<Eigen::Index>(i - 1)) * scale;
  }
  Eigen::VectorXd f(cols);
  for (Eigen::Index k = 0; k < cols; ++k) {
    f[k] = phi(spec.eigenvalues[static_cast<std::size_t>(k)]);
    if (!std::isfinite(f[k]))
      throw DomainError("sector_kernel: function undefined at eigenvalue index " +
                        std::to_string(k));
  }
  KernelTable t;
  t.grid = spec.grid;
  t.index = std::move(index);
  t.ell_lo = t.ell_hi = spec.ell;
  t.values = sub * f.asDiagonal() * sub.transpose();
  // Exact symmetry; the product above is symmetric up to rounding.
  t.values = 0.5 * (t.values + t.values.transpose()).eval();
  return t;
}

KernelTable sector_kernel(const SpectralData &spec, const ScalarFunction &phi) {
  return sector_kernel(spec, phi, interior_indices(spec.grid));
}

void write_csv(const KernelTable &table, std::ostream &os) {
  os << "r,rho,value\n";
  char buf[96];
  for (std::size_t i = 0; i < table.index.size(); ++i)
    for (std::size_t j = 0; j < table.index.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.12e,%.12e,%.12e\n", table.r(i), table.r(j),
                    table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      os << buf;
    }
}

} // namespace isq
