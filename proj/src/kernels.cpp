#include "isq/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "isq/bessel.hpp"
#include "isq/error.hpp"

namespace isq {

namespace {

constexpr double kPi = std::numbers::pi;

double frac(double v) { return v - std::floor(v); }

// Gauss-Legendre nodes mapped to [a, b].
template <class F>
double gauss_panel(const GaussRule &g, double a, double b, F f) {
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  double s = 0.0;
  for (std::size_t k = 0; k < g.nodes.size(); ++k) s += g.weights[k] * f(mid + half * g.nodes[k]);
  return half * s;
}

double e1(double x) { return -std::expint(-x); }

} // namespace

BesselOrder BesselOrder::for_coupling(double a, int ell) {
  if (a > 0.25) throw SupercriticalCoupling("BesselOrder: coupling above 1/4");
  if (ell < 0) throw InvalidRange("BesselOrder: negative ell");
  return {std::sqrt(ell * (ell + 1.0) - a + 0.25)};
}

BesselOrder BesselOrder::critical_sector(int ell) {
  if (ell < 0) throw InvalidRange("BesselOrder: negative ell");
  return {std::sqrt(ell * (ell + 1.0))};
}

double yukawa(const Point &x, const Point &y) {
  const double d = distance(x, y);
  if (!(d > 0.0)) throw SingularConfiguration("yukawa: x = y");
  return std::exp(-d) / (4.0 * kPi * d);
}

double log_sector_green(BesselOrder order, double r, double rho) {
  if (!(r > 0.0) || !(rho > 0.0)) throw DomainError("sector_green: need r, rho > 0");
  const double lo = std::min(r, rho), hi = std::max(r, rho);
  const auto a = log_bessel_ik(order.nu, lo);
  const auto b = log_bessel_ik(order.nu, hi);
  return 0.5 * (std::log(lo) + std::log(hi)) + a.log_i + b.log_k;
}

double sector_green(BesselOrder order, double r, double rho) {
  if (!(r > 0.0) || !(rho > 0.0)) throw DomainError("sector_green: need r, rho > 0");
  const double lo = std::min(r, rho), hi = std::max(r, rho);
  if (order.nu <= 40.0) {
    const auto a = bessel_ik_scaled(order.nu, lo);
    const auto b = bessel_ik_scaled(order.nu, hi);
    const double v = std::sqrt(lo * hi) * a.i * b.k * std::exp(lo - hi);
    if (v > 0.0 && std::isfinite(v)) return v;
  }
  return std::exp(log_sector_green(order, r, rho));
}

double sector_green_dirichlet(BesselOrder order, double r, double rho, double a, double b) {
  if (!(a > 0.0) || !(b > a)) throw InvalidRange("sector_green_dirichlet: need 0 < a < b");
  const double lo = std::min(r, rho), hi = std::max(r, rho);
  if (lo < a || hi > b) throw InvalidRange("sector_green_dirichlet: point outside [a, b]");
  if (lo == a || hi == b) return 0.0;
  const auto la = log_bessel_ik(order.nu, a);
  const auto lb = log_bessel_ik(order.nu, b);
  const auto l1 = log_bessel_ik(order.nu, lo);
  const auto l2 = log_bessel_ik(order.nu, hi);
  // Each solution corrected to vanish at its end, normalised by the
  // Wronskian of the corrected pair.
  const double left = -std::expm1(la.log_i - la.log_k + l1.log_k - l1.log_i);
  const double right = -std::expm1(lb.log_k - lb.log_i + l2.log_i - l2.log_k);
  const double denom = -std::expm1(la.log_i + lb.log_k - la.log_k - lb.log_i);
  return sector_green(order, lo, hi) * left * right / denom;
}

// ---------------------------------------------------------------------------

MvtSample mvt_bound_check(const Point &x, const Point &y, const SphereQuadrature &quad) {
  const double rx = norm(x), ry = norm(y);
  MvtSample s;
  if (2.0 * rx < ry) {
    s.region = MvtRegion::inner;
    s.envelope = rx * std::exp(-0.25 * ry) / (ry * ry);
  } else if (2.0 * ry < rx) {
    s.region = MvtRegion::outer;
    s.envelope = ry * std::exp(-0.25 * rx) / (rx * rx);
  } else {
    throw RegionError("mvt_bound_check: need 2|x| < |y| or 2|y| < |x|");
  }
  s.x_radius = rx;
  s.y_radius = ry;
  s.cos_angle = (x[0] * y[0] + x[1] * y[1] + x[2] * y[2]) / (rx * ry);
  s.value = std::abs(apply_pperp_kernel(yukawa, x, y, quad));
  s.ratio = s.value / s.envelope;
  return s;
}

MvtSweep mvt_sweep(MvtRegion region, std::size_t samples, const SphereQuadrature &quad) {
  // Additive recurrence with the generalised golden ratio in 3-D.
  const double g = 1.22074408460575947536;
  const double a1 = 1.0 / g, a2 = 1.0 / (g * g), a3 = 1.0 / (g * g * g);
  const double lo = std::log(0.05), hi = std::log(40.0);
  MvtSweep sw;
  sw.region = region;
  sw.samples.reserve(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    const double t1 = frac(0.5 + a1 * k), t2 = frac(0.5 + a2 * k), t3 = frac(0.5 + a3 * k);
    const double big = std::exp(lo + t1 * (hi - lo));
    const double small = big * (0.01 + 0.48 * t2);
    const double c = 2.0 * t3 - 1.0;
    const bool inner = region == MvtRegion::inner;
    const Point y = inner ? Point{0.0, 0.0, big} : Point{0.0, 0.0, small};
    const Point x = polar_point(inner ? small : big, c);
    sw.samples.push_back(mvt_bound_check(x, y, quad));
    sw.max_ratio = std::max(sw.max_ratio, sw.samples.back().ratio);
  }
  return sw;
}

// ---------------------------------------------------------------------------

WeightedL2 weighted_L2_bound(double y_radius, double p, int sign, const WeightedL2Options &opt) {
  if (!(std::abs(p) < 1.5)) throw InvalidRange("weighted_L2_bound: need |p| < 3/2");
  if (sign != 1 && sign != -1) throw InvalidRange("weighted_L2_bound: sign must be +1 or -1");
  if (!(y_radius > 0.0)) throw InvalidRange("weighted_L2_bound: need |y| > 0");
  if (opt.l_max < 2) throw InvalidRange("weighted_L2_bound: need l_max >= 2");

  const double rho = y_radius;
  const double alpha = -1.0 + sign * p;
  const GaussRule gl = gauss_legendre(opt.panel_nodes);
  const int L = opt.l_max;

  // Sector density sum_{l>=1} (2l+1)/(4 pi) g_l^2 / rho^2 at radius r, and
  // the part from the last two sectors.
  auto sector_density = [&](double r) {
    double all = 0.0, last = 0.0;
    for (int l = 1; l <= L; ++l) {
      const double g = sector_green(BesselOrder::free_sector(l), r, rho);
      const double term = (2.0 * l + 1.0) / (4.0 * kPi) * g * g / (rho * rho);
      all += term;
      if (l >= L - 1) last += term;
    }
    return std::array<double, 2>{all, last};
  };
  // Panels of width ds in s over [0, s_max] for r = r0 e^{dir s}.
  auto outer_region = [&](double r0, int dir, double s_max, double ds) {
    const int panels = std::max(4, static_cast<int>(std::ceil(s_max / ds)));
    const double h = s_max / panels;
    std::array<double, 2> acc{0.0, 0.0};
    const double half = 0.5 * h;
    for (int k = 0; k < panels; ++k)
      for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
        const double s = (k + 0.5) * h + half * gl.nodes[q];
        const double r = r0 * std::exp(dir * s);
        const double wgt = half * gl.weights[q] * std::pow(r, 2.0 * alpha) * r;
        const auto d = sector_density(r);
        acc[0] += wgt * d[0];
        acc[1] += wgt * d[1];
      }
    return acc;
  };

  WeightedL2 out;
  out.y_radius = y_radius;
  out.p = p;
  out.sign = sign;

  // 2|x| < |y|: the integrand behaves like r^{2 alpha + 5} in s = log(rho / 2r).
  const auto inner = outer_region(0.5 * rho, -1, std::min(400.0, 36.0 / (2.0 * alpha + 5.0)), 1.0);
  // |x| > 2|y|, up to where e^{-2r} is negligible.
  const auto far = outer_region(2.0 * rho, 1, std::log((2.0 * rho + 40.0) / (2.0 * rho)), 0.25);
  out.region_norm_sq[0] = inner[0];
  out.region_norm_sq[1] = far[0];
  const double tail = inner[1] + far[1];

  // Remaining shell rho/2 <= r <= 2 rho: closed-form spherical integral of
  // the squared Yukawa kernel minus its l = 0 part. Graded panels resolve the
  // logarithmic singularity at r = rho.
  {
    auto density = [&](double r) {
      const double lo = std::min(r, rho), hi = std::max(r, rho);
      const double full = r / (8.0 * kPi * rho) * (e1(2.0 * (hi - lo)) - e1(2.0 * (r + rho)));
      const double g0 = 0.5 * (std::exp(lo - hi) - std::exp(-lo - hi));
      return std::pow(r, 2.0 * alpha) * (full - g0 * g0 / (4.0 * kPi * rho * rho));
    };
    const int grade = 3, panels = 6;
    double total = 0.0;
    for (int side : {-1, 1}) {
      const double span = side < 0 ? 0.5 * rho : rho;
      for (int k = 0; k < panels; ++k)
        total += gauss_panel(gl, double(k) / panels, double(k + 1) / panels, [&](double u) {
          const double t = std::pow(u, grade);
          return density(rho + side * span * t) * span * grade * std::pow(u, grade - 1);
        });
    }
    out.region_norm_sq[2] = total;
  }

  const double outer = out.region_norm_sq[0] + out.region_norm_sq[1];
  out.norm = std::sqrt(outer + out.region_norm_sq[2]);
  out.envelope = std::pow(rho, sign * p) * std::min(1.0 / std::sqrt(rho), 1.0 / rho);
  out.ratio = out.norm / out.envelope;
  out.tail_fraction = outer > 0.0 ? tail / outer : 0.0;
  out.truncation_warning = out.tail_fraction > 1e-8;
  return out;
}

// ---------------------------------------------------------------------------

ResolventDifference::ResolventDifference(const RadialGrid &grid, int l_max)
    : grid_(grid), l_max_(l_max) {
  if (l_max < 1) throw InvalidRange("ResolventDifference: need l_max >= 1");
  for (int l = 1; l <= l_max; ++l) {
    free_.push_back(assemble_sector(0.0, l, grid));
    critical_.push_back(assemble_sector(0.25, l, grid));
  }
  const double kappa = grid.hardy_scale();
  potential_.assign(grid.size(), 0.0);
  for (std::size_t i = 1; i + 1 < grid.size(); ++i)
    potential_[i] = kappa / (grid.node(i) * grid.node(i));
}

double ResolventDifference::sector_direct(int ell, double z, double y) const {
  const double a = grid_.r_min(), b = grid_.r_max();
  return sector_green_dirichlet(BesselOrder::critical_sector(ell), z, y, a, b) -
         sector_green_dirichlet(BesselOrder::free_sector(ell), z, y, a, b);
}

double ResolventDifference::sector_identity(int ell, double z, double y) const {
  const SectorOperator &R0 = free_.at(ell - 1);
  const SectorOperator &RH = critical_.at(ell - 1);
  const std::vector<double> src = point_source(grid_, y);
  const std::vector<double> t0 = apply_resolvent(R0, 1.0, src);
  std::vector<double> v(grid_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.25 * potential_[i] * t0[i];
  const std::vector<double> first = apply_resolvent(R0, 1.0, v); // (I)
  std::vector<double> mid = apply_resolvent(RH, 1.0, v);
  for (std::size_t i = 0; i < mid.size(); ++i) mid[i] *= 0.25 * potential_[i];
  const std::vector<double> second = apply_resolvent(R0, 1.0, mid); // (II)
  std::vector<double> sum(grid_.size());
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = first[i] + second[i];
  return interpolate(grid_, sum, z);
}

namespace {

template <class F>
DifferenceValue sum_sectors(int l_max, double z, double y, double cos_angle, F sector) {
  const auto P = legendre_table(l_max, cos_angle);
  DifferenceValue out;
  double last = 0.0;
  for (int l = 1; l <= l_max; ++l) {
    const double term = (2.0 * l + 1.0) / (4.0 * kPi) * P[l] * sector(l) / (z * y);
    out.value += term;
    if (l >= l_max - 1) last += std::abs(term);
  }
  out.sectors = l_max;
  out.tail_fraction = out.value != 0.0 ? last / std::abs(out.value) : 0.0;
  out.truncation_warning = out.tail_fraction > 1e-8;
  return out;
}

} // namespace

DifferenceValue ResolventDifference::evaluate(double z, double y, double cos_angle,
                                              DifferenceMethod method) const {
  const double a = grid_.r_min(), b = grid_.r_max();
  if (z < a || z > b || y < a || y > b)
    throw InvalidRange("resolvent_difference_kernel: radius outside the grid");
  if (method == DifferenceMethod::direct)
    return sum_sectors(l_max_, z, y, cos_angle, [&](int l) { return sector_direct(l, z, y); });
  return sum_sectors(l_max_, z, y, cos_angle, [&](int l) { return sector_identity(l, z, y); });
}

DifferenceValue resolvent_difference_direct(double z, double y, double cos_angle, int l_max) {
  if (!(z > 0.0) || !(y > 0.0)) throw DomainError("resolvent_difference_direct: need z, y > 0");
  return sum_sectors(l_max, z, y, cos_angle, [&](int l) {
    return sector_green(BesselOrder::critical_sector(l), z, y) -
           sector_green(BesselOrder::free_sector(l), z, y);
  });
}

RadialResponse resolvent_difference_on_radial(double z, const ScalarFunction &g,
                                              const RadialGrid &grid,
                                              const SphereQuadrature &quad, int l_max) {
  RadialResponse out;
  std::vector<double> sector(static_cast<std::size_t>(l_max) + 1);
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double rho = grid.node(i);
    for (int l = 1; l <= l_max; ++l)
      sector[l] = sector_green(BesselOrder::critical_sector(l), z, rho) -
                  sector_green(BesselOrder::free_sector(l), z, rho);
    double mean = 0.0, mean_abs = 0.0;
    for (std::size_t k = 0; k < quad.nodes.size(); ++k) {
      const double G = zonal_sum(1, l_max, quad.nodes[k].cos_theta(),
                                 [&](int l) { return sector[l]; }) / (z * rho);
      mean += quad.weights[k] * G;
      mean_abs += quad.weights[k] * std::abs(G);
    }
    const double shell = 4.0 * kPi * rho * rho * grid.weight(i) * g(rho);
    out.value += shell * mean;
    out.magnitude += std::abs(shell) * mean_abs;
  }
  return out;
}

double difference_envelope(double z, double y, double p) {
  const double ratio = std::min(z, y) / (z + y);
  const auto decay = [](double r) { return std::min(1.0 / r, 1.0 / std::sqrt(r)); };
  return std::pow(ratio, p) * decay(z) * decay(y);
}

DifferenceLattice difference_bound_lattice(const std::vector<double> &p_values,
                                           std::size_t per_axis, int l_max, double lo,
                                           double hi) {
  if (per_axis < 2) throw InvalidRange("difference_bound_lattice: need >= 2 radii per axis");
  DifferenceLattice lat;
  lat.p_values = p_values;
  lat.max_ratio.assign(p_values.size(), 0.0);
  std::vector<double> radii(per_axis);
  for (std::size_t i = 0; i < per_axis; ++i)
    radii[i] = lo * std::pow(hi / lo, double(i) / double(per_axis - 1));
  for (double z : radii)
    for (double y : radii)
      for (double c : {1.0, 0.0, -1.0}) {
        const int L = std::max(l_max, static_cast<int>(4.0 * std::max(z, y)) + 32);
        const DifferenceValue g = resolvent_difference_direct(z, y, c, L);
        DifferenceLatticePoint pt{z, y, c, g.value, {}};
        for (std::size_t k = 0; k < p_values.size(); ++k) {
          pt.ratio.push_back(std::abs(g.value) / difference_envelope(z, y, p_values[k]));
          lat.max_ratio[k] = std::max(lat.max_ratio[k], pt.ratio.back());
        }
        lat.truncation_warning = lat.truncation_warning || g.truncation_warning;
        lat.points.push_back(std::move(pt));
      }
  return lat;
}

} // namespace isq
