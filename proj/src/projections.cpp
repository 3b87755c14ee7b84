#include "isq/projections.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "isq/error.hpp"

namespace isq {

double norm(const Point &x) { return std::hypot(x[0], x[1], x[2]); }

double distance(const Point &x, const Point &y) {
  return std::hypot(x[0] - y[0], x[1] - y[1], x[2] - y[2]);
}

Point scale(const Point &x, double s) { return {s * x[0], s * x[1], s * x[2]}; }

Point polar_point(double r, double cos_theta) {
  const double c = std::clamp(cos_theta, -1.0, 1.0);
  return {r * std::sqrt(std::max(0.0, 1.0 - c * c)), 0.0, r * c};
}

Direction::Direction(const Point &v) {
  const double n = norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("Direction: zero or non-finite vector");
  v_ = scale(v, 1.0 / n);
}

double Direction::phi() const { return std::atan2(v_[1], v_[0]); }

GaussRule gauss_legendre(int n) {
  if (n < 1) throw InvalidRange("gauss_legendre: need n >= 1");
  // P_n(x) and P_n'(x) by the three-term recurrence
  auto legendre = [n](double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    return std::pair{p1, n * (x * p1 - p0) / (x * x - 1.0)};
  };
  GaussRule g;
  g.nodes.resize(n);
  g.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x).second;
    g.nodes[i] = -x;
    g.nodes[n - 1 - i] = x;
    g.weights[i] = g.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  if (n % 2 == 1) g.nodes[n / 2] = 0.0;
  return g;
}

double SphereQuadrature::resolution() const {
  return std::numbers::pi / static_cast<double>(polar_count);
}

SphereQuadrature make_sphere_quadrature(int exact_degree) {
  if (exact_degree < 0) throw InvalidRange("make_sphere_quadrature: negative degree");
  // GL with k nodes is exact to degree 2k-1; the trapezoid in phi with m
  // nodes is exact for trigonometric degree m-1.
  const int k = exact_degree / 2 + 1;
  const int m = exact_degree + 1;
  const GaussRule gl = gauss_legendre(k);
  SphereQuadrature q;
  q.exact_degree = exact_degree;
  q.polar_count = k;
  q.nodes.reserve(static_cast<std::size_t>(k) * m);
  q.weights.reserve(static_cast<std::size_t>(k) * m);
  for (int i = 0; i < k; ++i) {
    const double c = gl.nodes[i];
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (int j = 0; j < m; ++j) {
      const double phi = 2.0 * std::numbers::pi * (j + 0.5) / m;
      q.nodes.emplace_back(Point{s * std::cos(phi), s * std::sin(phi), c});
      q.weights.push_back(0.5 * gl.weights[i] / m);
    }
  }
  return q;
}

std::vector<double> legendre_table(int l_max, double x) {
  std::vector<double> p(static_cast<std::size_t>(std::max(l_max, 0)) + 1);
  p[0] = 1.0;
  if (l_max >= 1) p[1] = x;
  for (int l = 2; l <= l_max; ++l)
    p[l] = ((2.0 * l - 1.0) * x * p[l - 1] - (l - 1.0) * p[l - 2]) / l;
  return p;
}

namespace {

// sqrt((2l+1)(l-m)!/(l+m)!) P_l^m(x), without the Condon-Shortley phase.
double normalized_associated_legendre(int ell, int m, double x) {
  const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
  double pmm = 1.0;
  for (int k = 1; k <= m; ++k) pmm *= std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * s;
  if (ell == m) return pmm;
  double prev = pmm;
  double cur = std::sqrt(2.0 * m + 3.0) * x * pmm;
  for (int l = m + 2; l <= ell; ++l) {
    const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - m * m));
    const double b = std::sqrt(((l - 1.0) * (l - 1.0) - m * m) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
    const double next = a * (x * cur - b * prev);
    prev = cur;
    cur = next;
  }
  return cur;
}

} // namespace

double real_harmonic(int ell, int m, const Direction &w) {
  if (ell < 0 || std::abs(m) > ell) throw InvalidRange("real_harmonic: need |m| <= ell");
  const int am = std::abs(m);
  const double p = normalized_associated_legendre(ell, am, w.cos_theta());
  if (m == 0) return p;
  const double phi = w.phi();
  return std::numbers::sqrt2 * p * (m > 0 ? std::cos(am * phi) : std::sin(am * phi));
}

double project_radial(const PointFunction &f, double r, const SphereQuadrature &quad) {
  double s = 0.0;
  for (std::size_t k = 0; k < quad.nodes.size(); ++k)
    s += quad.weights[k] * f(scale(quad.nodes[k].vec(), r));
  return s;
}

double apply_pperp_kernel(const PointKernel &k, const Point &x, const Point &y,
                          const SphereQuadrature &quad) {
  const double rx = norm(x), ry = norm(y);
  if (!(rx > 0.0) || !(ry > 0.0)) throw DomainError("apply_pperp_kernel: need |x|, |y| > 0");
  if (std::abs(rx - ry) < 0.5 * quad.resolution() * rx)
    throw SingularConfiguration("apply_pperp_kernel: sphere |x| passes through y");
  const double mean = project_radial([&](const Point &p) { return k(p, y); }, rx, quad);
  return k(x, y) - mean;
}

SectorExpansion analyze(const PointFunction &f, const RadialGrid &grid, int l_max,
                        const SphereQuadrature &quad) {
  if (l_max < 0) throw InvalidRange("analyze: negative l_max");
  SectorExpansion e;
  e.grid = grid;
  e.l_max = l_max;
  const std::size_t n = grid.size(), nq = quad.nodes.size();

  // Harmonics at the quadrature nodes, premultiplied by the weights.
  std::vector<std::pair<int, int>> keys;
  for (int l = 0; l <= l_max; ++l)
    for (int m = -l; m <= l; ++m) keys.emplace_back(l, m);
  std::vector<std::vector<double>> wy(keys.size(), std::vector<double>(nq));
  for (std::size_t a = 0; a < keys.size(); ++a)
    for (std::size_t k = 0; k < nq; ++k)
      wy[a][k] = quad.weights[k] * real_harmonic(keys[a].first, keys[a].second, quad.nodes[k]);

  for (const auto &key : keys) e.coefficients[key].assign(n, 0.0);
  std::vector<double> vals(nq);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < nq; ++k) vals[k] = f(scale(quad.nodes[k].vec(), grid.node(i)));
    for (std::size_t a = 0; a < keys.size(); ++a) {
      double s = 0.0;
      for (std::size_t k = 0; k < nq; ++k) s += wy[a][k] * vals[k];
      e.coefficients[keys[a]][i] = s;
    }
  }
  return e;
}

double monotone_cubic(std::span<const double> x, std::span<const double> y, double t) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw InvalidRange("monotone_cubic: need >= 2 matching samples");
  if (t < x[0] || t > x[n - 1]) throw InvalidRange("monotone_cubic: point outside data range");
  std::size_t j = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), t) - x.begin());
  j = std::clamp<std::size_t>(j, 1, n - 1) - 1;

  auto secant = [&](std::size_t i) { return (y[i + 1] - y[i]) / (x[i + 1] - x[i]); };
  auto slope = [&](std::size_t i) {
    if (i == 0) return secant(0);
    if (i == n - 1) return secant(n - 2);
    const double d0 = secant(i - 1), d1 = secant(i);
    if (d0 * d1 <= 0.0) return 0.0;
    const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
    const double w0 = 2.0 * h1 + h0, w1 = h1 + 2.0 * h0;
    return (w0 + w1) / (w0 / d0 + w1 / d1);
  };

  const double h = x[j + 1] - x[j];
  const double s = (t - x[j]) / h;
  const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
  const double h10 = s * (1.0 - s) * (1.0 - s);
  const double h01 = s * s * (3.0 - 2.0 * s);
  const double h11 = s * s * (s - 1.0);
  return h00 * y[j] + h10 * h * slope(j) + h01 * y[j + 1] + h11 * h * slope(j + 1);
}

double synthesize(const SectorExpansion &exp, const Point &x) {
  const double r = norm(x);
  if (!(r >= exp.grid.r_min()) || !(r <= exp.grid.r_max()))
    throw InvalidRange("synthesize: radius outside the grid");
  const Direction w(x);
  const auto nodes = exp.grid.nodes();
  double s = 0.0;
  for (const auto &[key, c] : exp.coefficients)
    s += monotone_cubic(nodes, c, r) * real_harmonic(key.first, key.second, w);
  return s;
}

TruncationCheck truncation_check(const SectorExpansion &exp) {
  double total = 0.0, tail = 0.0;
  for (const auto &[key, c] : exp.coefficients) {
    double sq = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) sq += exp.grid.weight(i) * c[i] * c[i];
    total += sq;
    if (key.first >= exp.l_max - 1) tail += sq;
  }
  TruncationCheck t;
  t.tail_fraction = total > 0.0 ? tail / total : 0.0;
  t.warning = t.tail_fraction > 1e-8;
  return t;
}

} // namespace isq
