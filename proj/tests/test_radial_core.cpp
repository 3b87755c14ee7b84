#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "isq/error.hpp"
#include "isq/radial_core.hpp"

using namespace isq;

namespace {

double wdot(const RadialGrid &g, std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += g.weight(i) * a[i] * b[i];
  return s;
}

std::vector<double> random_vector(const RadialGrid &g, std::mt19937_64 &rng) {
  std::normal_distribution<double> n01;
  std::vector<double> v(g.size(), 0.0);
  for (std::size_t i = 1; i + 1 < g.size(); ++i) v[i] = n01(rng);
  return v;
}

// Green's function of -u'' + u on [a, b] with Dirichlet ends.
double interval_green(double r, double rho, double a, double b) {
  const double lo = std::min(r, rho), hi = std::max(r, rho);
  return std::sinh(lo - a) * std::sinh(b - hi) / std::sinh(b - a);
}

} // namespace

TEST_CASE("make_grid validates its range") {
  CHECK_THROWS_AS(make_grid(1.0, 1.0, 64), InvalidRange);
  CHECK_THROWS_AS(make_grid(0.0, 1.0, 64), InvalidRange);
  CHECK_THROWS_AS(make_grid(1.0, 2.0, 15), InvalidRange);
}

TEST_CASE("grid is log-uniform with exact end points") {
  const auto g = make_grid(1e-3, 1e3, 1024);
  CHECK(g.node(0) == 1e-3);
  CHECK(g.node(1023) == 1e3);
  const double ratio = g.node(1) / g.node(0);
  for (std::size_t i = 0; i + 1 < g.size(); ++i)
    CHECK(std::abs(g.node(i + 1) / g.node(i) - ratio) < 1e-12 * ratio);
}

TEST_CASE("quadrature of r^-2 reproduces the antiderivative") {
  const auto g = make_grid(0.5, 2.0, 4096);
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = 1.0 / (g.node(i) * g.node(i));
  CHECK(std::abs(integrate(g, f) - 1.5) / 1.5 < 1e-4);

  // Second order in the log step: quartering the error when n doubles.
  const auto coarse = make_grid(0.5, 2.0, 64), fine = make_grid(0.5, 2.0, 127);
  auto err = [](const RadialGrid &gg) {
    std::vector<double> v(gg.size());
    for (std::size_t i = 0; i < gg.size(); ++i) v[i] = 1.0 / (gg.node(i) * gg.node(i));
    return std::abs(integrate(gg, v) - 1.5);
  };
  CHECK(err(coarse) / err(fine) == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("assemble_sector coefficients and coupling guard") {
  const auto g = make_grid(1e-3, 60.0, 256);
  CHECK_THROWS_AS(assemble_sector(0.3, 1, g), SupercriticalCoupling);
  CHECK_THROWS_AS(assemble_sector(0.25, -1, g), InvalidRange);
  const auto h1 = assemble_sector(0.25, 1, g);
  CHECK(h1.coefficient == 1.75);
  CHECK_FALSE(h1.critical_radial);
  const auto h0 = assemble_sector(0.25, 0, g);
  CHECK(h0.coefficient == -0.25);
  CHECK(h0.critical_radial);
  CHECK(h0.matrix.size() == g.interior_size());
}

TEST_CASE("identity-like operator decomposes into weighted unit vectors") {
  const auto g = make_grid(0.1, 10.0, 32);
  SectorOperator op = assemble_sector(0.0, 0, g);
  op.matrix.diag.assign(g.interior_size(), 1.0);
  op.matrix.off.assign(g.interior_size() - 1, 0.0);
  const auto s = decompose(op);
  for (double l : s.eigenvalues) CHECK(l == doctest::Approx(1.0));
  for (std::size_t k = 0; k < s.count(); ++k) {
    const auto v = s.eigenvector(k);
    int nonzero = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (std::abs(v[i]) > 1e-12) {
        ++nonzero;
        CHECK(std::abs(v[i]) == doctest::Approx(1.0 / std::sqrt(g.weight(i))));
      }
    CHECK(nonzero == 1);
  }
}

TEST_CASE("free radial sector reproduces the Dirichlet interval spectrum") {
  const double a = 1e-3, b = 40.0;
  const double exact = std::pow(std::numbers::pi / (b - a), 2);
  const auto s = decompose_below(assemble_sector(0.0, 0, make_grid(a, b, 4096)), 1.0);
  CHECK(std::abs(s.eigenvalues[0] - exact) / exact < 0.01);

  // Second-order convergence: doubling n cuts the error by at least 3.
  double prev = 0.0;
  for (std::size_t n : {256u, 512u, 1024u}) {
    const auto sd = decompose_below(assemble_sector(0.0, 0, make_grid(a, b, n)), 1.0);
    const double err = std::abs(sd.eigenvalues[2] - 9.0 * exact);
    if (prev > 0.0) CHECK(prev / err >= 3.0);
    prev = err;
  }
}

TEST_CASE("spectral data invariants") {
  const auto g = make_grid(1e-3, 60.0, 1024);
  const auto s = decompose(assemble_sector(0.25, 1, g));
  const Eigen::MatrixXd gram = s.vectors.transpose() * s.vectors;
  CHECK((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() < 1e-8);
  // Reduced-coordinate orthonormality in the grid quadrature.
  for (std::size_t k : {0u, 1u, 100u})
    for (std::size_t j : {0u, 1u, 100u})
      CHECK(std::abs(wdot(g, s.eigenvector(k), s.eigenvector(j)) - (k == j ? 1.0 : 0.0)) < 1e-8);
  // Residual relative to the matrix scale.
  const auto op = assemble_sector(0.25, 1, g);
  double scale = 0.0;
  for (double d : op.matrix.diag) scale = std::max(scale, std::abs(d));
  for (std::size_t k = 0; k < s.count(); k += 37) {
    const auto v = s.eigenvector(k);
    const auto av = apply_operator(op, v);
    double r2 = 0.0;
    for (std::size_t i = 1; i + 1 < g.size(); ++i)
      r2 += g.weight(i) * std::pow(av[i] - s.eigenvalues[k] * v[i], 2);
    CHECK(std::sqrt(r2) <= 1e-8 * (1.0 + std::abs(s.eigenvalues[k])) + 1e-13 * scale);
  }
  for (double l : s.eigenvalues) CHECK(l >= -1e-8);
}

TEST_CASE("functional calculus consistency") {
  const auto g = make_grid(1e-2, 30.0, 400);
  const auto op = assemble_sector(0.25, 2, g);
  const auto s = decompose(op);
  std::mt19937_64 rng(7);
  const auto v = random_vector(g, rng);

  const auto ones = apply_function(s, [](double) { return 1.0; }, v);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(ones[i] == doctest::Approx(v[i]).epsilon(1e-9));

  const auto lam = apply_function(s, [](double l) { return l; }, v);
  const auto direct = apply_operator(op, v);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    num += std::pow(lam[i] - direct[i], 2);
    den += direct[i] * direct[i];
  }
  CHECK(std::sqrt(num / den) < 1e-7);

  // Homomorphism: (phi psi)(A) = phi(A) psi(A).
  auto phi = [](double l) { return 1.0 / (l + 1.0); };
  auto psi = [](double l) { return std::exp(-0.1 * l); };
  const auto lhs = apply_function(s, [&](double l) { return phi(l) * psi(l); }, v);
  const auto rhs = apply_function(s, phi, apply_function(s, psi, v));
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(lhs[i] - rhs[i]) < 1e-7);

  // Resolvent by spectral calculus equals the direct tridiagonal solve.
  const auto res = apply_resolvent(op, 1.0, v);
  const auto res_spec = apply_function(s, phi, v);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(res[i] == doctest::Approx(res_spec[i]).epsilon(1e-8));

  CHECK_THROWS_AS(apply_function(s, [](double l) { return 1.0 / std::sqrt(l - 1e9); }, v), DomainError);
}

TEST_CASE("free radial resolvent matches the interval Green's function") {
  const double a = 1e-3, b = 40.0;
  const auto g = make_grid(a, b, 4096);
  const auto s = decompose(assemble_sector(0.0, 0, g));
  auto phi = [](double l) { return 1.0 / (l + 1.0); };
  for (double rho : {0.05, 1.0, 7.0}) {
    const std::size_t j = g.locate(rho);
    std::vector<double> delta(g.size(), 0.0);
    delta[j] = 1.0 / g.weight(j);
    const auto u = apply_function(s, phi, delta);
    double worst = 0.0;
    for (std::size_t i = 5; i + 5 < g.size(); ++i) {
      if (g.node(i) > b / 2) break;
      const double exact = interval_green(g.node(i), g.node(j), a, b);
      // Entries below 1e-8 of the diagonal sit at the rounding floor of the
      // spectral sum; relative comparison is meaningless there.
      if (exact < 1e-8 * interval_green(g.node(j), g.node(j), a, b)) continue;
      worst = std::max(worst, std::abs(u[i] - exact) / exact);
    }
    CAPTURE(rho);
    CHECK(worst < 1e-3);
  }
}

TEST_CASE("sector kernel against sinh(r<) e^{-r>} on the half line") {
  const auto g = make_grid(1e-5, 40.0, 4096);
  const auto s = decompose(assemble_sector(0.0, 0, g));
  const auto idx = sampled_indices(g, 5, 64);
  const auto t = sector_kernel(s, [](double l) { return 1.0 / (l + 1.0); }, idx);
  double worst = 0.0;
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const double r = t.r(i), rho = t.r(j);
      if (std::min(r, rho) < 0.05 || std::max(r, rho) > 20.0) continue;
      const double exact = std::sinh(std::min(r, rho)) * std::exp(-std::max(r, rho)) / (r * rho);
      worst = std::max(worst, std::abs(t.values(i, j) - exact) / exact);
    }
  CHECK(worst < 1e-3);
  CHECK((t.values - t.values.transpose()).cwiseAbs().maxCoeff() == 0.0);

  // Off-diagonal decay at least e^{-|r - rho|/2} relative to the diagonal.
  for (std::size_t j = 0; j < idx.size(); ++j)
    for (std::size_t i = 0; i < idx.size(); ++i)
      if (t.r(i) > t.r(j) + 1.0 && t.r(i) < 30.0)
        CHECK(t.values(i, j) <= std::exp(-(t.r(i) - t.r(j)) / 2.0) * t.values(j, j));
}

TEST_CASE("improved Hardy positivity of the discrete quadratic form") {
  const auto g = make_grid(1e-4, 100.0, 2048);
  std::mt19937_64 rng(11);
  for (int ell = 1; ell <= 4; ++ell) {
    const auto op = assemble_sector(0.25, ell, g);
    for (int trial = 0; trial < 20; ++trial) {
      const auto u = random_vector(g, rng);
      const double form = wdot(g, apply_operator(op, u), u);
      CHECK(form >= -1e-8 * wdot(g, u, u));
    }
    CHECK(smallest_eigenvalue(op.matrix) > 0.0);
  }
  // The critical radial sector is still nonnegative: the discrete Hardy
  // inequality holds with the sharp constant.
  CHECK(smallest_eigenvalue(assemble_sector(0.25, 0, g).matrix) > 0.0);
}

TEST_CASE("point sources and interpolation") {
  const auto g = make_grid(0.1, 10.0, 200);
  std::vector<double> u(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) u[i] = 3.0 * g.node(i) - 1.0;
  const auto d = point_source(g, 2.345);
  CHECK(wdot(g, d, u) == doctest::Approx(3.0 * 2.345 - 1.0));
  CHECK(interpolate(g, u, 2.345) == doctest::Approx(3.0 * 2.345 - 1.0));
  CHECK_THROWS_AS(point_source(g, 20.0), InvalidRange);
}
