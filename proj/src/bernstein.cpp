#include "isq/bernstein.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "isq/error.hpp"
#include "isq/norms.hpp"
#include "isq/projections.hpp"

namespace isq {

namespace {

struct Lattice {
  std::vector<std::size_t> radii;
  std::vector<double> cosines;
};

Lattice make_lattice(const RadialGrid &grid, std::size_t stride, int angles) {
  Lattice lat;
  lat.radii = sampled_indices(grid, 1, stride);
  for (int k = 0; k <= angles; ++k) lat.cosines.push_back(std::cos(std::numbers::pi * k / angles));
  return lat;
}

} // namespace

double spectral_bound(double t) {
  if (!(t > 0.0)) throw InvalidRange("spectral_bound: t must be positive");
  const double lam = 2.0 / t - 1.0; // critical point of e^{-t l}(l+1)^2
  return lam > 0.0 ? std::exp(-t * lam) * (lam + 1.0) * (lam + 1.0) : 1.0;
}

RadialGrid halve_r_min(const RadialGrid &grid, int k) {
  const double h = grid.log_step();
  const auto m = static_cast<std::size_t>(std::llround(k * std::log(2.0) / h));
  return make_grid(grid.r_min() * std::exp(-static_cast<double>(m) * h), grid.r_max(), grid.size() + m);
}

HeatSup heat_kernel_sup(const RadialGrid &grid, int l_max, double t, double coupling, bool projection) {
  if (!(t > 0.0)) throw InvalidRange("heat_kernel_sup: t must be positive");
  if (l_max < 1) throw InvalidRange("heat_kernel_sup: l_max must be >= 1");
  const double cutoff = 45.0 / t; // e^{-t lambda} below 3e-20 beyond
  const int lo = projection ? 1 : 0;
  const auto heat = [t](double lam) { return std::exp(-t * lam); };

  HeatSup out;
  std::vector<SpectralData> spectra;
  for (int l = lo; l <= l_max; ++l) {
    spectra.push_back(decompose_below(assemble_sector(coupling, l, grid), cutoff));
    for (double lam : spectra.back().eigenvalues)
      out.spectral_factor = std::max(out.spectral_factor, std::exp(-t * lam) * (lam + 1.0) * (lam + 1.0));
  }

  const std::size_t m = grid.interior_size();
  std::size_t stride = std::max<std::size_t>(1, m / 48);
  int angles = 12;
  double prev = -1.0;
  for (;;) {
    const Lattice lat = make_lattice(grid, stride, angles);
    const auto nr = static_cast<Eigen::Index>(lat.radii.size());
    std::vector<Eigen::MatrixXd> tables;
    for (const auto &spec : spectra) tables.push_back(sector_kernel(spec, heat, lat.radii).values);

    double best = -1.0;
    for (double c : lat.cosines) {
      const auto p = legendre_table(l_max, c);
      Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(nr, nr);
      for (std::size_t a = 0; a < spectra.size(); ++a) {
        const int l = spectra[a].ell;
        sum += (2 * l + 1) / (4.0 * std::numbers::pi) * p[static_cast<std::size_t>(l)] * tables[a];
      }
      Eigen::Index i, j;
      const double v = sum.cwiseAbs().maxCoeff(&i, &j);
      if (v > best) {
        best = v;
        out.r = grid.node(lat.radii[static_cast<std::size_t>(i)]);
        out.rho = grid.node(lat.radii[static_cast<std::size_t>(j)]);
        out.cos_angle = c;
        double total = 0.0, tail = 0.0;
        for (std::size_t a = 0; a < spectra.size(); ++a) {
          const int l = spectra[a].ell;
          const double term = std::abs((2 * l + 1) * p[static_cast<std::size_t>(l)] * tables[a](i, j));
          total += term;
          if (l >= l_max - 1) tail += term;
        }
        out.tail_fraction = total > 0.0 ? tail / total : 0.0;
      }
    }
    out.value = best;
    out.radii = lat.radii.size();
    out.angles = lat.cosines.size();
    out.lattice_settled = prev > 0.0 && std::abs(best - prev) < 0.02 * best;
    prev = best;
    if (out.lattice_settled || stride == 1 || lat.radii.size() > 400) break;
    stride = std::max<std::size_t>(1, stride / 2);
    angles *= 2;
  }
  return out;
}

BernsteinReport bernstein_sup(const BernsteinOptions &o) {
  if (!(o.t > 0.0)) throw InvalidRange("bernstein_sup: t must be positive");
  if (o.r_min_halvings < 0) throw InvalidRange("bernstein_sup: r_min_halvings must be >= 0");
  BernsteinReport rep;
  rep.t = o.t;
  rep.coupling = o.coupling;
  rep.projection = o.projection;
  rep.base = heat_kernel_sup(o.grid, o.l_max, o.t, o.coupling, o.projection);
  rep.sup = rep.base.value;
  rep.spectral_factor = rep.base.spectral_factor;
  rep.spectral_bound = spectral_bound(o.t);
  rep.truncation_warning = rep.base.tail_fraction > 1e-8;
  rep.trail.push_back({o.grid.r_min(), o.grid.size(), rep.sup});
  for (int k = 1; k <= o.r_min_halvings; ++k) {
    const RadialGrid g = halve_r_min(o.grid, k);
    const HeatSup h = heat_kernel_sup(g, o.l_max, o.t, o.coupling, o.projection);
    rep.trail.push_back({g.r_min(), g.size(), h.value});
    rep.trail_deviation = std::max(rep.trail_deviation, std::abs(h.value - rep.sup) / rep.sup);
  }

  std::optional<OperatorTag> tag;
  if (o.coupling == 0.25 && o.projection) tag = OperatorTag::h_resolvent_pperp;
  if (o.coupling == 0.0 && !o.projection) tag = OperatorTag::free_resolvent;
  if (tag) {
    rep.resolvent_2inf = sup_row_norm(*tag, o.grid, o.l_max).value;
    rep.resolvent_12 = sup_column_norm(*tag, o.grid, o.l_max).value;
    rep.product = *rep.resolvent_2inf * rep.spectral_factor * *rep.resolvent_12;
  }
  return rep;
}

} // namespace isq
