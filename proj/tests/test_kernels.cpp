#include "doctest.h"

#include <cmath>
#include <numbers>

#include "isq/error.hpp"
#include "isq/kernels.hpp"

using namespace isq;

namespace {

constexpr double kPi = std::numbers::pi;

// Reduced-coordinate FD resolvent column at node j.
std::vector<double> fd_column(const SectorOperator &op, std::size_t j) {
  return apply_resolvent(op, 1.0, point_source(op.grid, op.grid.node(j)));
}

} // namespace

TEST_CASE("yukawa closed form, singularity and mass") {
  CHECK(yukawa({0, 0, 0}, {0, 0, 1}) == doctest::Approx(std::exp(-1.0) / (4.0 * kPi)).epsilon(1e-15));
  CHECK(yukawa({0, 0, 0}, {0, 0, 1}) == doctest::Approx(0.029265).epsilon(1e-4));
  CHECK_THROWS_AS(yukawa({1, 2, 3}, {1, 2, 3}), SingularConfiguration);
  for (double d : {10.0, 40.0, 200.0}) CHECK(yukawa({0, 0, 0}, {d, 0, 0}) < 1e-3 * std::exp(-0.5 * d));

  const auto g = make_grid(1e-6, 60.0, 8192);
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    f[i] = 4.0 * kPi * g.node(i) * g.node(i) * yukawa({g.node(i), 0, 0}, {0, 0, 0});
  CHECK(integrate(g, f) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("Bessel orders of the sector operators") {
  CHECK(BesselOrder::critical_sector(1).nu == std::sqrt(2.0));
  CHECK(BesselOrder::free_sector(3).nu == 3.5);
  for (int l = 0; l <= 6; ++l) {
    CHECK(BesselOrder::for_coupling(0.25, l).nu == doctest::Approx(BesselOrder::critical_sector(l).nu).epsilon(1e-15));
    CHECK(BesselOrder::for_coupling(0.0, l).nu == doctest::Approx(l + 0.5).epsilon(1e-15));
  }
  CHECK_THROWS_AS(BesselOrder::for_coupling(0.3, 1), SupercriticalCoupling);
}

TEST_CASE("sector_green reduces to elementary functions at order 1/2") {
  for (double r : {0.01, 0.3, 1.0, 4.0, 25.0})
    for (double rho : {0.02, 0.5, 2.0, 9.0, 60.0}) {
      const double lo = std::min(r, rho), hi = std::max(r, rho);
      const double ref = 0.5 * (std::exp(lo - hi) - std::exp(-lo - hi));
      CHECK(sector_green({0.5}, r, rho) == doctest::Approx(ref).epsilon(1e-10));
      CHECK(sector_green({0.5}, r, rho) == sector_green({0.5}, rho, r));
    }
}

TEST_CASE("sector_green is continuous with unit derivative jump") {
  for (double nu : {0.5, std::sqrt(2.0), 2.5, std::sqrt(12.0)})
    for (double rho : {0.1, 1.0, 7.0}) {
      const double e = 1e-5 * rho;
      const double left = (sector_green({nu}, rho, rho) - sector_green({nu}, rho - e, rho)) / e;
      const double right = (sector_green({nu}, rho + e, rho) - sector_green({nu}, rho, rho)) / e;
      CHECK(right - left == doctest::Approx(-1.0).epsilon(1e-3));
      CHECK(std::abs(sector_green({nu}, rho + 1e-12, rho) - sector_green({nu}, rho, rho)) < 1e-10);
    }
}

TEST_CASE("log-scaled sector kernel for large arguments") {
  const BesselOrder o{std::sqrt(2.0)};
  CHECK(log_sector_green(o, 1.5, 3.0) == doctest::Approx(std::log(sector_green(o, 1.5, 3.0))).epsilon(1e-12));
  const double far = log_sector_green(o, 800.0, 2000.0);
  CHECK(std::isfinite(far));
  CHECK(far == doctest::Approx(-1200.0 - std::log(2.0)).epsilon(1e-3));
  CHECK(sector_green(o, 800.0, 2000.0) == 0.0);
  CHECK(std::isfinite(log_sector_green(BesselOrder::free_sector(300), 1e-3, 1.0)));
}

TEST_CASE("Dirichlet sector kernel") {
  const double a = 0.01, b = 12.0;
  for (double r : {0.02, 0.5, 3.0, 11.0})
    for (double rho : {0.05, 1.0, 6.0}) {
      const double lo = std::min(r, rho), hi = std::max(r, rho);
      const double ref = std::sinh(lo - a) * std::sinh(b - hi) / std::sinh(b - a);
      CHECK(sector_green_dirichlet({0.5}, r, rho, a, b) == doctest::Approx(ref).epsilon(1e-11));
    }
  const BesselOrder o{std::sqrt(6.0)};
  CHECK(sector_green_dirichlet(o, a, 1.0, a, b) == 0.0);
  CHECK(sector_green_dirichlet(o, 1.0, b, a, b) == 0.0);
  CHECK(sector_green_dirichlet(o, 1.0, 2.0, 1e-8, 200.0) ==
        doctest::Approx(sector_green(o, 1.0, 2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(sector_green_dirichlet(o, 20.0, 1.0, a, b), InvalidRange);
}

TEST_CASE("finite-difference sector resolvents match the Bessel kernels") {
  const auto grid = make_grid(1e-3, 60.0, 4096);
  const double a = grid.r_min(), b = grid.r_max();
  double worst = 0.0;
  for (int l = 1; l <= 6; ++l)
    for (double coupling : {0.0, 0.25}) {
      const auto op = assemble_sector(coupling, l, grid);
      const BesselOrder order = BesselOrder::for_coupling(coupling, l);
      for (double target : {0.01, 0.1, 1.0, 5.0, 15.0}) {
        const std::size_t j = grid.locate(target);
        const double rho = grid.node(j);
        const auto col = fd_column(op, j);
        const double diag = col[j];
        for (std::size_t i = 5; i + 5 < grid.size(); i += 7) {
          const double r = grid.node(i);
          if (r > b / 3.0 || std::abs(col[i]) < 1e-8 * diag) continue;
          const double ref = sector_green_dirichlet(order, r, rho, a, b);
          worst = std::max(worst, std::abs(col[i] - ref) / std::abs(ref));
          if (r >= 0.05 && rho >= 0.05) {
            const double inf = sector_green(order, r, rho);
            CHECK_MESSAGE(std::abs(col[i] - inf) <= 1e-3 * inf, "l=" << l << " a=" << coupling << " r=" << r << " rho=" << rho << " dir=" << ref);
          }
        }
      }
    }
  CHECK(worst < 1e-3);
}

TEST_CASE("mean-value-theorem envelopes") {
  const auto q = make_sphere_quadrature(40);
  CHECK_THROWS_AS(mvt_bound_check({0, 0, 1.0}, {0, 0, 1.5}, q), RegionError);
  const auto a = mvt_bound_check(polar_point(0.1, 0.3), {0, 0, 1.0}, q);
  CHECK(a.region == MvtRegion::inner);
  CHECK(std::isfinite(a.ratio));
  const auto b = mvt_bound_check(polar_point(4.0, -0.2), {0, 0, 0.5}, q);
  CHECK(b.region == MvtRegion::outer);
  CHECK(std::isfinite(b.ratio));

  const auto q2 = make_sphere_quadrature(80);
  for (MvtRegion region : {MvtRegion::inner, MvtRegion::outer}) {
    const auto s1 = mvt_sweep(region, 200, q);
    const auto s2 = mvt_sweep(region, 200, q2);
    REQUIRE(s1.samples.size() == 200);
    CHECK(std::isfinite(s1.max_ratio));
    CHECK(s1.max_ratio > 0.0);
    CHECK(std::abs(s2.max_ratio - s1.max_ratio) < 0.05 * s1.max_ratio);
  }
}

TEST_CASE("three-region weighted L2 bound") {
  CHECK_THROWS_AS(weighted_L2_bound(1.0, 1.5, 1), InvalidRange);
  CHECK_THROWS_AS(weighted_L2_bound(1.0, 0.5, 0), InvalidRange);

  const auto w = weighted_L2_bound(1.0, 0.0, 1);
  CHECK(w.envelope == doctest::Approx(1.0));
  CHECK(std::isfinite(w.ratio));
  CHECK(w.ratio > 0.0);

  for (int sign : {1, -1})
    for (double p : {0.0, 0.5, 1.0}) {
      double lo = 1e300, hi = 0.0;
      for (double y : {1.0, 2.0, 4.0, 8.0, 16.0}) {
        const auto v = weighted_L2_bound(y, p, sign);
        CHECK(std::isfinite(v.ratio));
        CHECK(v.tail_fraction < 1e-8);
        CHECK_FALSE(v.truncation_warning);
        lo = std::min(lo, v.ratio);
        hi = std::max(hi, v.ratio);
      }
      CHECK(hi / lo < 2.0);
    }
}

TEST_CASE("weighted L2 norm agrees with a plain sector sum") {
  // Sum over l = 1..L of the sector densities on every region, no closed
  // form; the l-tail in the shell |x| ~ |y| decays only like 1/L, so the
  // oracle is extrapolated from two cutoffs.
  const double rho = 2.0, p = 0.5;
  const double alpha = -1.0 + p;
  const GaussRule gl = gauss_legendre(32);
  auto sector_norm_sq = [&](int L) {
    auto density = [&](double r) {
      double s = 0.0;
      for (int l = 1; l <= L; ++l) {
        const double g = sector_green(BesselOrder::free_sector(l), r, rho);
        s += (2.0 * l + 1.0) / (4.0 * kPi) * g * g / (rho * rho);
      }
      return std::pow(r, 2.0 * alpha) * s;
    };
    double total = 0.0;
    // log-graded panels on both sides of r = rho
    for (int side : {-1, 1})
      for (int k = 0; k < 60; ++k) {
        const double t0 = std::exp(-0.5 * (k + 1)), t1 = std::exp(-0.5 * k);
        const double half = 0.5 * (t1 - t0), mid = 0.5 * (t1 + t0);
        for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
          const double t = mid + half * gl.nodes[q];
          const double r = side < 0 ? rho * t : rho + 40.0 * (1.0 - t);
          const double jac = side < 0 ? rho : 40.0;
          total += half * gl.weights[q] * jac * density(r);
        }
      }
    return total;
  };
  const double s1 = sector_norm_sq(150), s2 = sector_norm_sq(300);
  const double extrapolated = 2.0 * s2 - s1;
  const auto w = weighted_L2_bound(rho, p, 1);
  CHECK(w.norm * w.norm == doctest::Approx(extrapolated).epsilon(2e-3));
}

TEST_CASE("resolvent difference: direct and identity routes") {
  const auto grid = make_grid(1e-3, 60.0, 4096);
  const ResolventDifference rd(grid, 32);

  const auto d = rd.evaluate(1.0, 1.0, 1.0, DifferenceMethod::direct);
  const auto i = rd.evaluate(1.0, 1.0, 1.0, DifferenceMethod::identity);
  CHECK(std::abs(d.value - i.value) <= 1e-3 * std::abs(d.value));
  CHECK(d.truncation_warning);

  for (auto [z, y, c] : {std::array{0.5, 2.0, 1.0}, std::array{0.05, 0.3, -1.0},
                         std::array{3.0, 7.0, 0.5}, std::array{0.01, 0.01, 1.0},
                         std::array{1.0, 1.0, 0.0}}) {
    const auto dv = rd.evaluate(z, y, c, DifferenceMethod::direct);
    const auto iv = rd.evaluate(z, y, c, DifferenceMethod::identity);
    if (std::abs(dv.value) > 1e-10) CHECK(std::abs(dv.value - iv.value) <= 1e-3 * std::abs(dv.value));
    // conjugate symmetry
    const auto dt = rd.evaluate(y, z, c, DifferenceMethod::direct);
    const auto it = rd.evaluate(y, z, c, DifferenceMethod::identity);
    CHECK(std::abs(dv.value - dt.value) <= 1e-10 * std::abs(dv.value));
    CHECK(std::abs(iv.value - it.value) <= 1e-10 * std::abs(iv.value));
  }
  CHECK_THROWS_AS(rd.evaluate(100.0, 1.0, 1.0, DifferenceMethod::direct), InvalidRange);
}

TEST_CASE("resolvent difference annihilates radial input") {
  const auto grid = make_grid(1e-3, 40.0, 256);
  const auto q = make_sphere_quadrature(40);
  for (double z : {0.3, 2.0}) {
    const auto r = resolvent_difference_on_radial(z, [](double rho) { return std::exp(-rho); }, grid, q, 16);
    CHECK(r.magnitude > 0.0);
    CHECK(std::abs(r.value) <= 1e-10 * r.magnitude);
  }
}

TEST_CASE("resolvent difference is dominated by and decays like its parts") {
  const int L = 32;
  for (double y : {0.5, 2.0})
    for (double c : {1.0, 0.3, -1.0}) {
      double prev = INFINITY;
      for (double z = y + 1.0; z < y + 12.0; z += 0.5) {
        const double g = resolvent_difference_direct(z, y, c, L).value;
        const auto P = legendre_table(L, c);
        double free_k = 0.0, crit_k = 0.0;
        for (int l = 1; l <= L; ++l) {
          const double f = (2.0 * l + 1.0) / (4.0 * kPi) * P[l] / (z * y);
          free_k += f * sector_green(BesselOrder::free_sector(l), z, y);
          crit_k += f * sector_green(BesselOrder::critical_sector(l), z, y);
        }
        CHECK(std::abs(g) <= std::abs(free_k) + std::abs(crit_k) + 1e-300);
        // At oblique angles G can change sign, so monotone decay is only
        // asserted along the axis.
        if (std::abs(c) == 1.0) CHECK(std::abs(g) < prev);
        prev = std::abs(g);
      }
    }
}

TEST_CASE("bound-ratio lattice") {
  const std::vector<double> ps{0.0, 0.5, -0.5, 1.0, -1.0, 1.35, -1.35};
  const auto lat = difference_bound_lattice(ps, 7, 32);
  CHECK(lat.points.size() == 7 * 7 * 3);
  for (double m : lat.max_ratio) {
    CHECK(std::isfinite(m));
    CHECK(m > 0.0);
  }
  // Denser lattice leaves the supremum essentially unchanged.
  const auto dense = difference_bound_lattice(ps, 13, 32);
  for (std::size_t k = 0; k < ps.size(); ++k)
    CHECK(dense.max_ratio[k] < 1.5 * lat.max_ratio[k]);
  CHECK(lat.truncation_warning);
}
