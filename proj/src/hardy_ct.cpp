#include "isq/hardy_ct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "isq/error.hpp"

namespace isq {

namespace {

// D^{-1/2} T D^{-1/2} with D = kappa / r^2 on the interior nodes.
SymTridiag weight_reduced(const SymTridiag &t, const RadialGrid &grid) {
  const double kappa = grid.hardy_scale();
  const std::size_t m = t.size();
  std::vector<double> s(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double d = kappa / (grid.node(k + 1) * grid.node(k + 1));
    if (!(d > 0.0)) throw DomainError("Hardy weight is not positive definite");
    s[k] = 1.0 / std::sqrt(d);
  }
  SymTridiag out;
  out.diag.resize(m);
  out.off.resize(m - 1);
  for (std::size_t k = 0; k < m; ++k) out.diag[k] = t.diag[k] * s[k] * s[k];
  for (std::size_t k = 0; k + 1 < m; ++k) out.off[k] = t.off[k] * s[k] * s[k + 1];
  return out;
}

RadialGrid widened(const RadialGrid &base, int level) {
  if (level == 0) return base;
  const double h = base.log_step();
  const auto m = static_cast<std::size_t>(std::llround(3.0 * level * std::log(10.0) / h));
  const double grow = std::exp(static_cast<double>(m) * h);
  return make_grid(base.r_min() / grow, base.r_max() * grow, base.size() + 2 * m);
}

} // namespace

double sector_hardy_constant(int ell, const RadialGrid &grid) {
  if (ell < 0) throw InvalidRange("hardy_constant: ell must be nonnegative");
  const SymTridiag t = assemble_radial_form(grid, 1.0, ell * (ell + 1.0));
  return smallest_eigenvalue(weight_reduced(t, grid));
}

double discrete_hardy_constant(int ell, const RadialGrid &grid) {
  const double h = grid.log_step();
  const double q = std::exp(h);
  const double m = static_cast<double>(grid.interior_size());
  const double lowest = (q + 1.0) - 2.0 * std::sqrt(q) * std::cos(std::numbers::pi / (m + 1.0));
  return ell * (ell + 1.0) + lowest / ((q - 1.0) * 4.0 * std::tanh(0.25 * h));
}

HardyReport hardy_constant(HardyMode mode, int ell_or_lmax, const RadialGrid &base, int levels) {
  if (levels < 1) throw InvalidRange("hardy_constant: need at least one level");
  if (ell_or_lmax < 0) throw InvalidRange("hardy_constant: ell must be nonnegative");
  if (mode == HardyMode::perp && ell_or_lmax < 1)
    throw InvalidRange("hardy_constant: the perpendicular mode needs l_max >= 1");
  int lo = ell_or_lmax, hi = ell_or_lmax;
  if (mode == HardyMode::full) lo = 0;
  if (mode == HardyMode::perp) lo = 1;

  HardyReport rep;
  rep.mode = mode;
  for (int level = 0; level < levels; ++level) {
    const RadialGrid g = widened(base, level);
    double best = std::numeric_limits<double>::infinity();
    for (int l = lo; l <= hi; ++l) {
      const double c = sector_hardy_constant(l, g);
      if (c < best) {
        best = c;
        rep.ell = l;
      }
    }
    rep.trail.push_back({g.r_min(), g.r_max(), g.size(), best});
    rep.best_constant = best;
    rep.r_min = g.r_min();
    rep.r_max = g.r_max();
    rep.n = g.size();
  }
  return rep;
}

double smallest_form_eigenvalue(const RadialGrid &grid, double stiffness, double inverse_square) {
  return smallest_eigenvalue(assemble_radial_form(grid, stiffness, inverse_square));
}

PositivityGaps positivity_checks(const RadialGrid &grid, int ell) {
  if (ell < 0) throw InvalidRange("positivity_checks: ell must be nonnegative");
  const double c = ell * (ell + 1.0);
  PositivityGaps g;
  g.ell = ell;
  // -Delta/9 - 1/(4r^2): stiffness 1/9, inverse square c/9 - 1/4.
  g.gap_laplacian = smallest_form_eigenvalue(grid, 1.0 / 9.0, c / 9.0 - 0.25);
  // -Delta - 1/(4r^2) - 2/r^2
  g.gap_potential = smallest_form_eigenvalue(grid, 1.0, c - 0.25 - 2.0);
  return g;
}

std::vector<double> radial_skew_superdiagonal(const RadialGrid &grid) {
  // sum_i (u_{i+1} v_i - u_i v_{i+1}) / r_i^log, r^log the logarithmic mean of
  // the interval, discretises int (u' v - u v') / r dr.
  const double h = grid.log_step();
  const std::size_t m = grid.interior_size();
  std::vector<double> sup(m - 1);
  for (std::size_t k = 0; k + 1 < m; ++k) {
    const std::size_t i = k + 1;
    const double c = h / (grid.node(i + 1) - grid.node(i));
    sup[k] = c / std::sqrt(grid.weight(i) * grid.weight(i + 1));
  }
  return sup;
}

CTOperators ct_assemble(double p, const std::vector<int> &ells, const RadialGrid &grid) {
  CTOperators ops;
  ops.p = p;
  ops.margin = std::numeric_limits<double>::infinity();
  const auto m = static_cast<Eigen::Index>(grid.interior_size());
  const double kappa = grid.hardy_scale();
  Eigen::VectorXd potential(m);
  for (Eigen::Index k = 0; k < m; ++k)
    potential(k) = kappa / (grid.node(k + 1) * grid.node(k + 1));
  const auto sup = radial_skew_superdiagonal(grid);
  Eigen::MatrixXd skew = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index k = 0; k + 1 < m; ++k) {
    skew(k, k + 1) = sup[k];
    skew(k + 1, k) = -sup[k];
  }

  for (int ell : ells) {
    if (ell < 1) throw InvalidRange("ct_assemble: sectors must have ell >= 1");
    const SectorOperator op = assemble_sector(0.25, ell, grid);
    const TridiagEigen eig = tridiagonal_eigen(op.matrix, true);
    Eigen::VectorXd s(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      if (!(eig.values[k] > -1.0)) throw DomainError("ct_assemble: T + 1 is not positive");
      s(k) = 1.0 / std::sqrt(eig.values[k] + 1.0);
    }
    const Eigen::MatrixXd root = eig.vectors * s.asDiagonal() * eig.vectors.transpose();
    const Eigen::MatrixXd M = root * potential.asDiagonal() * root;

    CTSector sec;
    sec.ell = ell;
    sec.a_matrix = Eigen::MatrixXd::Identity(m, m) - p * p * M;
    sec.b_imag = -p * (root * skew * root);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_m(M, Eigen::EigenvaluesOnly);
    sec.potential_norm = es_m.eigenvalues().maxCoeff();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_a(sec.a_matrix, Eigen::EigenvaluesOnly);
    sec.margin = es_a.eigenvalues().minCoeff();
    // A + iB = A - b_imag is real.
    Eigen::BDCSVD<Eigen::MatrixXd> svd(sec.a_matrix - sec.b_imag);
    sec.min_singular = svd.singularValues().minCoeff();
    sec.asymmetry_a = (sec.a_matrix - sec.a_matrix.transpose()).cwiseAbs().maxCoeff();
    // B - B^* = i (b_imag + b_imag^T)
    sec.asymmetry_b = (sec.b_imag + sec.b_imag.transpose()).cwiseAbs().maxCoeff();
    ops.margin = std::min(ops.margin, sec.margin);
    ops.sectors.push_back(std::move(sec));
  }
  return ops;
}

double potential_norm_tridiagonal(int ell, const RadialGrid &grid) {
  if (ell < 1) throw InvalidRange("potential_norm_tridiagonal: need ell >= 1");
  SymTridiag t = assemble_sector(0.25, ell, grid).matrix;
  for (double &d : t.diag) d += 1.0;
  return 1.0 / smallest_eigenvalue(weight_reduced(t, grid));
}

WeightedResolvent weighted_resolvent_norm(double p, int ell, const RadialGrid &grid) {
  if (ell < 1) throw InvalidRange("weighted_resolvent_norm: need ell >= 1");
  const SymTridiag t = assemble_sector(0.25, ell, grid).matrix;
  const auto left = radial_power(grid, -1.0 - p);
  const auto right = radial_power(grid, -1.0 + p);
  const std::size_t m = t.size();
  std::vector<double> work(m);
  // N^T N x = right R left^2 R right x
  const SymOperator normal = [&](std::span<const double> x, std::span<double> y) {
    for (std::size_t k = 0; k < m; ++k) work[k] = right[k] * x[k];
    auto u = solve_shifted(t, 1.0, work);
    for (std::size_t k = 0; k < m; ++k) u[k] *= left[k] * left[k];
    const auto v = solve_shifted(t, 1.0, u);
    for (std::size_t k = 0; k < m; ++k) y[k] = right[k] * v[k];
  };
  const TopEigen top = lanczos_top(normal, m);
  WeightedResolvent out;
  out.p = p;
  out.ell = ell;
  out.norm = std::sqrt(top.value);
  out.iterations = top.iterations;
  return out;
}

} // namespace isq
