#include "isq/norms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "isq/error.hpp"
#include "isq/projections.hpp"

namespace isq {

namespace {

constexpr double four_pi = 4.0 * std::numbers::pi;

struct Sector {
  int ell;
  SectorOperator critical; // a = 1/4
  SectorOperator free;     // a = 0
};

int lowest_sector(OperatorTag op) { return op == OperatorTag::free_resolvent ? 0 : 1; }

std::vector<Sector> build_sectors(OperatorTag op, const RadialGrid &grid, int l_max) {
  if (l_max < 1) throw InvalidRange("estimate_norm: l_max must be >= 1");
  std::vector<Sector> out;
  for (int l = lowest_sector(op); l <= l_max; ++l)
    out.push_back({l, assemble_sector(0.25, l, grid), assemble_sector(0.0, l, grid)});
  return out;
}

// Sector block of the operator in symmetric coordinates.
std::vector<double> apply_symmetric(OperatorTag op, const Sector &s, std::span<const double> x) {
  switch (op) {
  case OperatorTag::free_resolvent:
    return solve_shifted(s.free.matrix, 1.0, x);
  case OperatorTag::h_resolvent_pperp:
    return solve_shifted(s.critical.matrix, 1.0, x);
  case OperatorTag::resolvent_difference: {
    auto y = solve_shifted(s.critical.matrix, 1.0, x);
    const auto z = solve_shifted(s.free.matrix, 1.0, x);
    for (std::size_t k = 0; k < y.size(); ++k) y[k] -= z[k];
    return y;
  }
  }
  return {};
}

// Same block acting on reduced-coordinate radial vectors over all nodes.
std::vector<double> apply_reduced(OperatorTag op, const Sector &s, std::span<const double> v) {
  switch (op) {
  case OperatorTag::free_resolvent:
    return apply_resolvent(s.free, 1.0, v);
  case OperatorTag::h_resolvent_pperp:
    return apply_resolvent(s.critical, 1.0, v);
  case OperatorTag::resolvent_difference: {
    auto y = apply_resolvent(s.critical, 1.0, v);
    const auto z = apply_resolvent(s.free, 1.0, v);
    for (std::size_t k = 0; k < y.size(); ++k) y[k] -= z[k];
    return y;
  }
  }
  return {};
}

double tail_share(const std::vector<double> &parts) {
  double total = 0.0;
  for (double p : parts) total += p;
  if (total <= 0.0 || parts.size() < 2) return 0.0;
  return (parts[parts.size() - 1] + parts[parts.size() - 2]) / total;
}

using SectorParts = std::function<std::vector<double>(std::size_t)>;

// Essential sup over a node lattice, doubled in density until the sup moves
// by less than 2%, then completed on every node around the maximiser.
SupKernel lattice_sup(const RadialGrid &grid, const SectorParts &parts) {
  std::map<std::size_t, std::vector<double>> cache;
  auto value = [&](std::size_t i) {
    auto it = cache.find(i);
    if (it == cache.end()) it = cache.emplace(i, parts(i)).first;
    double v = 0.0;
    for (double p : it->second) v += p;
    return v;
  };
  SupKernel out;
  std::size_t stride = std::max<std::size_t>(1, grid.interior_size() / 64);
  double prev = -1.0;
  for (;;) {
    const auto idx = sampled_indices(grid, 1, stride);
    double best = -1.0;
    for (std::size_t i : idx)
      if (const double v = value(i); v > best) {
        best = v;
        out.argmax = i;
      }
    out.lattice_sizes.push_back(idx.size());
    const bool settled = prev > 0.0 && std::abs(best - prev) < 0.02 * best;
    prev = best;
    if (settled || stride == 1) break;
    stride = std::max<std::size_t>(1, stride / 2);
  }
  const std::size_t lo = std::max<std::size_t>(1, out.argmax > stride ? out.argmax - stride : 1);
  const std::size_t hi = std::min(grid.size() - 2, out.argmax + stride);
  double best = value(out.argmax);
  for (std::size_t i = lo; i <= hi; ++i)
    if (const double v = value(i); v > best) {
      best = v;
      out.argmax = i;
    }
  out.value = std::sqrt(best);
  out.tail_fraction = tail_share(cache.at(out.argmax));
  return out;
}

double relative_change(double a, double base) { return std::abs(a - base) / std::abs(base); }

} // namespace

std::string to_string(OperatorTag tag) {
  switch (tag) {
  case OperatorTag::resolvent_difference: return "resolvent-difference";
  case OperatorTag::h_resolvent_pperp: return "H-resolvent-Pperp";
  case OperatorTag::free_resolvent: return "free-resolvent";
  }
  return "?";
}

std::string to_string(NormMethod method) {
  switch (method) {
  case NormMethod::power_iteration: return "power-iteration";
  case NormMethod::kernel_integration: return "kernel-integration";
  case NormMethod::sup_kernel: return "sup-kernel";
  }
  return "?";
}

OperatorTag parse_operator_tag(const std::string &name) {
  for (auto t : {OperatorTag::resolvent_difference, OperatorTag::h_resolvent_pperp, OperatorTag::free_resolvent})
    if (to_string(t) == name) return t;
  throw InvalidRange("unknown operator tag '" + name + "'");
}

RadialGrid widen_domain(const RadialGrid &grid, double factor) {
  const double h = grid.log_step();
  const auto m = static_cast<std::size_t>(std::llround(std::log(factor) / h));
  const double grow = std::exp(static_cast<double>(m) * h);
  return make_grid(grid.r_min() / grow, grid.r_max() * grow, grid.size() + 2 * m);
}

RadialGrid double_nodes(const RadialGrid &grid) {
  return make_grid(grid.r_min(), grid.r_max(), 2 * grid.size() - 1);
}

SupKernel sup_row_norm(OperatorTag op, const RadialGrid &grid, int l_max) {
  const auto sectors = build_sectors(op, grid, l_max);
  const std::size_t m = grid.interior_size();
  // ||K(x_i, .)||^2 = sum_l (2l+1)/(4 pi r_i^2 w_i) |S_l e_i|^2
  return lattice_sup(grid, [&](std::size_t i) {
    std::vector<double> e(m, 0.0), parts;
    e[i - 1] = 1.0;
    const double scale = 1.0 / (four_pi * grid.node(i) * grid.node(i) * grid.weight(i));
    for (const auto &s : sectors) {
      const auto y = apply_symmetric(op, s, e);
      double sq = 0.0;
      for (double v : y) sq += v * v;
      parts.push_back((2 * s.ell + 1) * scale * sq);
    }
    return parts;
  });
}

SupKernel sup_column_norm(OperatorTag op, const RadialGrid &grid, int l_max) {
  const auto sectors = build_sectors(op, grid, l_max);
  // ||K(., y_j)||^2 = sum_l (2l+1)/(4 pi rho_j^2) int |(R_l delta_j)(r)|^2 dr
  return lattice_sup(grid, [&](std::size_t j) {
    const auto delta = point_source(grid, grid.node(j));
    const double scale = 1.0 / (four_pi * grid.node(j) * grid.node(j));
    std::vector<double> parts, sq;
    for (const auto &s : sectors) {
      const auto u = apply_reduced(op, s, delta);
      sq.resize(u.size());
      for (std::size_t k = 0; k < u.size(); ++k) sq[k] = u[k] * u[k];
      parts.push_back((2 * s.ell + 1) * scale * integrate(grid, sq));
    }
    return parts;
  });
}

SectorNorm l2_norm(OperatorTag op, const RadialGrid &grid, int l_max) {
  const auto sectors = build_sectors(op, grid, l_max);
  SectorNorm out{-1.0, 0};
  for (const auto &s : sectors) {
    const SymOperator block = [&](std::span<const double> x, std::span<double> y) {
      const auto r = apply_symmetric(op, s, x);
      std::copy(r.begin(), r.end(), y.begin());
    };
    const TopEigen top = lanczos_top(block, grid.interior_size());
    if (top.value > out.value) out = {top.value, s.ell};
  }
  return out;
}

double witness_ratio(OperatorTag op, const RadialGrid &grid, int l_max, std::size_t i0, double s) {
  if (i0 == 0 || i0 + 1 >= grid.size()) throw InvalidRange("witness_ratio: boundary node");
  if (!(s >= 1.0) || !std::isfinite(s)) throw InvalidRange("witness_ratio: need finite s >= 1");
  const auto sectors = build_sectors(op, grid, l_max);
  const std::size_t m = grid.interior_size();
  const double r0 = grid.node(i0), w0 = grid.weight(i0);

  // f = K(x0, .): sector columns S e_0; T f has sector columns S^2 e_0.
  std::vector<double> e(m, 0.0);
  e[i0 - 1] = 1.0;
  double f_sq = 0.0;
  std::vector<std::vector<double>> tf;
  for (const auto &sec : sectors) {
    const auto v = apply_symmetric(op, sec, e);
    double sq = 0.0;
    for (double x : v) sq += x * x;
    f_sq += (2 * sec.ell + 1) / (four_pi * r0 * r0 * w0) * sq;
    tf.push_back(apply_symmetric(op, sec, v));
  }

  // Angular integral by Gauss-Legendre in cos(gamma); exact for integer s
  // up to 6 at this node count.
  const int nodes = std::max(3 * l_max + 2, static_cast<int>(std::ceil(0.5 * (s * l_max + 2))));
  const GaussRule gl = gauss_legendre(nodes);
  std::vector<std::vector<double>> legendre;
  for (double t : gl.nodes) legendre.push_back(legendre_table(l_max, t));

  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t i = k + 1;
    const double radial = 1.0 / (grid.node(i) * r0 * std::sqrt(grid.weight(i) * w0));
    double shell = 0.0;
    for (std::size_t g = 0; g < gl.nodes.size(); ++g) {
      double val = 0.0;
      for (std::size_t a = 0; a < sectors.size(); ++a) {
        const int l = sectors[a].ell;
        val += (2 * l + 1) / four_pi * legendre[g][static_cast<std::size_t>(l)] * tf[a][k];
      }
      shell += gl.weights[g] * std::pow(std::abs(val * radial), s);
    }
    total += grid.weight(i) * grid.node(i) * grid.node(i) * 2.0 * std::numbers::pi * shell;
  }
  return std::pow(total, 1.0 / s) / std::sqrt(f_sq);
}

NormReport estimate_norm(OperatorTag op, const Exponent &q, const Exponent &s, const NormOptions &options) {
  const Exponent two = Exponent::finite(2);
  NormReport rep;
  rep.op = op;
  rep.q = q;
  rep.s = s;

  // Reduce (q, 2) to (2, q') by symmetry of the kernel.
  enum class Kind { l2, rows, columns, interpolated } kind;
  Exponent target = s;
  if (q == two && s == two) kind = Kind::l2;
  else if (q == two && s.is_infinite()) kind = Kind::rows;
  else if (q == Exponent::finite(1) && s == two) kind = Kind::columns;
  else if (q == two && s.to_double() > 2.0) kind = Kind::interpolated;
  else if (s == two && q.to_double() < 2.0) {
    kind = Kind::interpolated;
    target = q.conjugate();
  } else
    throw InvalidRange("estimate_norm: unsupported pair (" + q.str() + ", " + s.str() + ")");

  std::vector<std::pair<std::string, RadialGrid>> grids{{"base", options.grid}};
  if (options.refine) {
    grids.emplace_back("n x2", double_nodes(options.grid));
    grids.emplace_back("domain x2", widen_domain(options.grid, 2.0));
  }

  for (std::size_t g = 0; g < grids.size(); ++g) {
    const RadialGrid &grid = grids[g].second;
    double value = 0.0, lower = 0.0;
    switch (kind) {
    case Kind::l2: {
      const auto n = l2_norm(op, grid, options.l_max);
      value = lower = n.value;
      if (g == 0) rep.argmax_sector = n.ell;
      rep.method = NormMethod::power_iteration;
      break;
    }
    case Kind::rows:
    case Kind::columns: {
      const auto sk = kind == Kind::rows ? sup_row_norm(op, grid, options.l_max)
                                         : sup_column_norm(op, grid, options.l_max);
      value = lower = sk.value;
      if (g == 0) {
        rep.argmax_radius = grid.node(sk.argmax);
        rep.tail_fraction = sk.tail_fraction;
      }
      rep.method = NormMethod::sup_kernel;
      break;
    }
    case Kind::interpolated: {
      const double sv = target.to_double();
      const double theta = 2.0 / sv; // 1/s = theta/2 + (1 - theta)/inf
      const auto n22 = l2_norm(op, grid, options.l_max);
      const auto sk = sup_row_norm(op, grid, options.l_max);
      value = std::pow(n22.value, theta) * std::pow(sk.value, 1.0 - theta);
      if (g == 0) {
        lower = witness_ratio(op, grid, options.l_max, sk.argmax, sv);
        rep.argmax_radius = grid.node(sk.argmax);
        rep.argmax_sector = n22.ell;
        rep.tail_fraction = sk.tail_fraction;
      }
      rep.method = NormMethod::kernel_integration;
      break;
    }
    }
    if (g == 0) {
      rep.estimate = rep.upper = value;
      rep.lower = lower;
    }
    rep.trail.push_back({grids[g].first, grid.r_min(), grid.r_max(), grid.size(), value});
  }
  for (const auto &t : rep.trail) rep.trail_deviation = std::max(rep.trail_deviation, relative_change(t.value, rep.estimate));
  rep.truncation_warning = rep.tail_fraction > 1e-8;
  if (kind == Kind::l2 && rep.trail.size() == 3) rep.monotone_in_domain = rep.trail[2].value >= rep.trail[0].value - 1e-12;
  return rep;
}

} // namespace isq
