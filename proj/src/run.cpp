#include "isq/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "isq/bernstein.hpp"
#include "isq/error.hpp"
#include "isq/hardy_ct.hpp"
#include "isq/kernels.hpp"
#include "isq/norms.hpp"
#include "isq/region.hpp"

namespace isq {

namespace {

using nlohmann::json;

constexpr double kPi = std::numbers::pi;

struct CommandName {
  Command c;
  const char *name;
};

constexpr CommandName kCommands[] = {
    {Command::hardy, "hardy"},
    {Command::positivity, "positivity"},
    {Command::combes_thomas, "combes-thomas"},
    {Command::weighted_resolvent, "weighted-resolvent"},
    {Command::kernel_bounds, "kernel-bounds"},
    {Command::resolvent_difference, "resolvent-difference"},
    {Command::region, "region"},
    {Command::schur, "schur"},
    {Command::norms, "norms"},
    {Command::bernstein, "bernstein"},
    {Command::all, "all"},
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double relative(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double parse_double(const std::string &key, const std::string &text) {
  const std::string t = trim(text);
  char *end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || *end != '\0') throw ConfigError(key + ": '" + text + "' is not a number");
  return v;
}

long long parse_integer(const std::string &key, const std::string &text) {
  const std::string t = trim(text);
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(t, &used);
  } catch (const std::exception &) {
    throw ConfigError(key + ": '" + text + "' is not an integer");
  }
  if (used != t.size()) throw ConfigError(key + ": '" + text + "' is not an integer");
  return v;
}

std::uint64_t parse_unsigned(const std::string &key, const std::string &text) {
  const std::string t = trim(text);
  std::size_t used = 0;
  std::uint64_t v = 0;
  if (t.empty() || t[0] == '-' || t[0] == '+') throw ConfigError(key + ": '" + text + "' is not a nonnegative integer");
  try {
    v = std::stoull(t, &used);
  } catch (const std::exception &) {
    throw ConfigError(key + ": '" + text + "' is not a nonnegative integer");
  }
  if (used != t.size()) throw ConfigError(key + ": '" + text + "' is not a nonnegative integer");
  return v;
}

bool parse_bool(const std::string &key, const std::string &text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(key + ": '" + text + "' is not a boolean");
}

std::pair<std::string, std::string> parse_pair(const std::string &text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("pairs: '" + text + "' is not of the form q:s");
  return {trim(text.substr(0, colon)), trim(text.substr(colon + 1))};
}

RegionQuery to_query(const std::pair<std::string, std::string> &p) {
  return {Exponent::parse(p.first), Exponent::parse(p.second)};
}

std::string pair_label(const RegionQuery &q) { return "(" + q.q.str() + "," + q.s.str() + ")"; }

std::vector<double> p_list(const RunConfig &cfg, std::vector<double> fallback) {
  return cfg.p_values.empty() ? fallback : cfg.p_values;
}

std::vector<RegionQuery> pair_list(const RunConfig &cfg, std::vector<std::pair<std::string, std::string>> fallback) {
  std::vector<RegionQuery> out;
  for (const auto &p : cfg.pairs.empty() ? fallback : cfg.pairs) out.push_back(to_query(p));
  return out;
}

RadialGrid base_grid(const RunConfig &cfg) { return make_grid(cfg.r_min, cfg.r_max, cfg.n); }

// ---------------------------------------------------------------------------

void run_hardy(const RunConfig &cfg, Report &rep) {
  const auto grid = base_grid(cfg);
  std::vector<int> sectors{0, 1};
  if (cfg.sector >= 0) sectors = {cfg.sector};
  json out = json::array();
  for (int l : sectors) {
    const auto h = hardy_constant(HardyMode::sector, l, grid, cfg.refine);
    const double target = (l + 0.5) * (l + 0.5);
    const std::string anchor = l == 0 ? "Hardy inequality: int |grad f|^2 >= (1/4) int |f|^2/|x|^2, sharp"
                                      : "improved Hardy inequality on angular momentum l: constant (l+1/2)^2";
    const std::string name = "hardy/l=" + std::to_string(l);
    rep.report(name + "/constant", anchor, h.best_constant, "target " + num(target));
    rep.check(name + "/relative-deviation", anchor, relative(h.best_constant, target), "<=", 0.05);
    auto &s = rep.add_series("refinement_trails", "hardy l=" + std::to_string(l));
    json trail = json::array();
    for (const auto &e : h.trail) {
      s.points.push_back({e.r_min, e.constant});
      trail.push_back({{"r_min", json_number(e.r_min)}, {"r_max", json_number(e.r_max)}, {"n", e.n},
                       {"constant", json_number(e.constant)}});
    }
    out.push_back({{"ell", l}, {"target", json_number(target)}, {"constant", json_number(h.best_constant)},
                   {"trail", trail}});
  }
  rep.data["hardy"] = out;
}

void run_positivity(const RunConfig &cfg, Report &rep) {
  const auto grid = base_grid(cfg);
  std::vector<int> sectors{0, 1, 2, 3};
  if (cfg.sector >= 0) sectors = {cfg.sector};
  json out = json::array();
  for (int l : sectors) {
    const auto g = positivity_checks(grid, l);
    const std::string name = "positivity/l=" + std::to_string(l);
    if (l == 0) {
      rep.report(name + "/laplacian-gap", "H + (8/9) Delta >= 0 on the range of P-perp", g.gap_laplacian,
                 "radial sector, outside the statement");
      rep.check(name + "/potential-gap", "H - 2/|x|^2 is not positive on radial functions", g.gap_potential, "<",
                0.0, "negative control");
    } else {
      rep.check(name + "/laplacian-gap", "H + (8/9) Delta >= 0 on the range of P-perp", g.gap_laplacian, ">=",
                -1e-8);
      rep.check(name + "/potential-gap", "H - 2/|x|^2 >= 0 on the range of P-perp", g.gap_potential, ">=", -1e-8);
    }
    out.push_back({{"ell", l}, {"gap_laplacian", json_number(g.gap_laplacian)},
                   {"gap_potential", json_number(g.gap_potential)}});
  }
  rep.data["positivity"] = out;
}

void run_combes_thomas(const RunConfig &cfg, Report &rep) {
  const auto grid = base_grid(cfg);
  double vnorm = 0.0;
  int worst = 1;
  for (int l = 1; l <= cfg.l_max; ++l) {
    const double v = potential_norm_tridiagonal(l, grid);
    if (v > vnorm) vnorm = v, worst = l;
  }
  rep.check("combes-thomas/potential-norm", "||(H_perp+1)^{-1/2} |x|^{-2} (H_perp+1)^{-1/2}|| <= 1/2", vnorm, "<=",
            0.5 + 1e-6, "attained at l=" + std::to_string(worst));
  rep.check("combes-thomas/inverse-radius-norm", "|| |x|^{-1} (H_perp+1)^{-1/2} || <= 2^{-1/2}", std::sqrt(vnorm),
            "<=", std::sqrt(0.5) + 1e-6, "TT* of the potential norm");

  const auto dense = make_grid(cfg.r_min, cfg.r_max, cfg.ct_n);
  const auto ps = p_list(cfg, {0.0, 0.5, -0.5, 1.0, -1.0, 1.25, -1.25});
  auto &margin_series = rep.add_series("margin_curve", "d dense n=" + std::to_string(cfg.ct_n));
  json out = json::array();
  for (double p : ps) {
    const auto ct = ct_assemble(p, {1, 2, 3}, dense);
    double sigma = std::numeric_limits<double>::infinity(), asym = 0.0;
    for (const auto &s : ct.sectors) {
      sigma = std::min(sigma, s.min_singular);
      asym = std::max({asym, s.asymmetry_a, s.asymmetry_b});
    }
    const std::string name = "combes-thomas/p=" + num(p);
    rep.check(name + "/margin", "Combes-Thomas margin d >= 1 - p^2/2", ct.margin, ">=", 1.0 - p * p / 2.0 - 1e-6);
    rep.report(name + "/min-singular", "A + iB invertible with A >= d", sigma);
    rep.report(name + "/hermitian-defect", "A symmetric and B Hermitian", asym);
    margin_series.points.push_back({p, ct.margin});
    out.push_back({{"p", json_number(p)}, {"margin", json_number(ct.margin)}, {"min_singular", json_number(sigma)},
                   {"bound", json_number(1.0 - p * p / 2.0)}});
  }
  std::sort(margin_series.points.begin(), margin_series.points.end(),
            [](const SeriesPoint &a, const SeriesPoint &b) { return a.x < b.x; });
  auto &bound = rep.add_series("margin_curve", "1 - p^2/2");
  auto &full = rep.add_series("margin_curve", "1 - p^2 ||V|| n=" + std::to_string(cfg.n));
  for (int k = -27; k <= 27; ++k) {
    const double p = 0.05 * k;
    bound.points.push_back({p, 1.0 - p * p / 2.0});
    full.points.push_back({p, 1.0 - p * p * vnorm});
  }
  rep.data["combes_thomas"] = {{"potential_norm", json_number(vnorm)}, {"potential_norm_sector", worst},
                               {"margins", out}};
}

void run_weighted_resolvent(const RunConfig &cfg, Report &rep) {
  const auto grid = base_grid(cfg);
  const int ell = std::max(cfg.sector, 1);
  const auto ps = p_list(cfg, {0.0, 1.0, -1.0, 1.5});
  const std::string anchor = "|x|^{-1-p} (H+1)^{-1} |x|^{-1+p} bounded on P-perp for |p| < sqrt 2";
  json out = json::array();
  for (double p : ps) {
    const std::string name = "weighted-resolvent/p=" + num(p);
    auto &s = rep.add_series("refinement_trails", "weighted resolvent p=" + num(p));
    json trail = json::array();
    if (std::abs(p) < std::numbers::sqrt2) {
      const double a = weighted_resolvent_norm(p, ell, grid).norm;
      const auto fine = double_nodes(grid);
      const double b = weighted_resolvent_norm(p, ell, fine).norm;
      rep.report(name + "/norm", anchor, a);
      rep.check(name + "/n-doubling-change", anchor, relative(b, a), "<=", 0.05);
      s.points = {{static_cast<double>(grid.size()), a}, {static_cast<double>(fine.size()), b}};
      trail = {{{"n", grid.size()}, {"norm", json_number(a)}}, {{"n", fine.size()}, {"norm", json_number(b)}}};
    } else {
      double min_step = std::numeric_limits<double>::infinity(), prev = 0.0;
      for (int k = 0; k < cfg.refine; ++k) {
        const auto g = halve_r_min(grid, 10 * k);
        const double v = weighted_resolvent_norm(p, ell, g).norm;
        if (k > 0) min_step = std::min(min_step, v / prev);
        prev = v;
        s.points.push_back({g.r_min(), v});
        trail.push_back({{"r_min", json_number(g.r_min())}, {"n", g.size()}, {"norm", json_number(v)}});
      }
      if (cfg.refine < 2)
        rep.report(name + "/growth", "weighted resolvent unbounded for |p| >= sqrt 2", std::nan(""),
                   "needs refine >= 2");
      else
        rep.check(name + "/growth-per-r_min-step", "weighted resolvent unbounded for |p| >= sqrt 2", min_step, ">",
                  1.5, "negative control");
    }
    out.push_back({{"p", json_number(p)}, {"ell", ell}, {"trail", trail}});
  }
  rep.data["weighted_resolvent"] = out;
}

void run_kernel_bounds(const RunConfig &cfg, Report &rep) {
  const auto q1 = make_sphere_quadrature(40), q2 = make_sphere_quadrature(80);
  json mvt = json::array();
  for (MvtRegion region : {MvtRegion::inner, MvtRegion::outer}) {
    const bool inner = region == MvtRegion::inner;
    const auto a = mvt_sweep(region, 200, q1), b = mvt_sweep(region, 200, q2);
    const std::string name = std::string("kernel-bounds/mvt-") + (inner ? "inner" : "outer");
    const std::string anchor = inner ? "|P-perp R_0 delta_y(x)| <~ |x| |y|^{-2} e^{-|y|/4} for 2|x| < |y|"
                                     : "|P-perp R_0 delta_y(x)| <~ |y| |x|^{-2} e^{-|x|/4} for 2|y| < |x|";
    rep.report(name + "/max-ratio", anchor, a.max_ratio, "200 samples, degree 40");
    rep.check(name + "/quadrature-doubling-change", anchor, relative(b.max_ratio, a.max_ratio), "<=", 0.05);
    mvt.push_back({{"region", inner ? "inner" : "outer"}, {"max_ratio", json_number(a.max_ratio)},
                   {"max_ratio_doubled", json_number(b.max_ratio)}});
  }

  const auto ps = p_list(cfg, {0.0, 0.5, -0.5, 1.0, -1.0});
  WeightedL2Options opt;
  opt.l_max = cfg.l_max;
  json l2 = json::array();
  for (double p : ps) {
    const int sign = p < 0 ? -1 : 1;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    bool warn = false;
    auto &s = rep.add_series("kernel_ratio_grid", "L2 envelope p=" + num(p));
    json rows = json::array();
    for (double y : {1.0, 2.0, 4.0, 8.0, 16.0}) {
      const auto w = weighted_L2_bound(y, std::abs(p), sign, opt);
      lo = std::min(lo, w.ratio);
      hi = std::max(hi, w.ratio);
      warn = warn || w.truncation_warning;
      s.points.push_back({y, w.ratio});
      rows.push_back({{"y", json_number(y)}, {"norm", json_number(w.norm)}, {"ratio", json_number(w.ratio)}});
    }
    const std::string name = "kernel-bounds/l2-envelope/p=" + num(p);
    const std::string anchor = "|| |x|^{-1+p} P-perp R_0 delta_y ||_2 <~ |y|^p min(|y|^{-1/2}, |y|^{-1})";
    rep.report(name + "/max-ratio", anchor, hi, warn ? "sector truncation warning" : "");
    rep.check(name + "/ratio-spread", anchor, hi / lo, "<", 2.0, "max/min over |y| in {1,2,4,8,16}");
    l2.push_back({{"p", json_number(p)}, {"ratios", rows}});
  }
  rep.data["kernel_bounds"] = {{"mvt", mvt}, {"l2_envelope", l2}};
}

void run_resolvent_difference(const RunConfig &cfg, Report &rep) {
  const auto grid = base_grid(cfg);
  const double a = grid.r_min(), b = grid.r_max();

  // Finite-difference sector resolvents against the modified-Bessel kernels.
  json oracle = json::array();
  for (double coupling : {0.0, 0.25}) {
    double worst = 0.0, worst_inf = 0.0;
    std::size_t compared = 0;
    for (int l = 1; l <= std::min(6, cfg.l_max); ++l) {
      const auto op = assemble_sector(coupling, l, grid);
      const auto order = BesselOrder::for_coupling(coupling, l);
      for (double target : {0.01, 0.1, 1.0, 5.0, 15.0}) {
        if (target < 10.0 * a || target > b / 3.0) continue;
        const std::size_t j = grid.locate(target);
        const double rho = grid.node(j);
        const auto col = apply_resolvent(op, 1.0, point_source(grid, rho));
        for (std::size_t i = 5; i + 5 < grid.size(); i += 7) {
          const double r = grid.node(i);
          if (r > b / 3.0 || std::abs(col[i]) < 1e-8 * col[j]) continue;
          const double ref = sector_green_dirichlet(order, r, rho, a, b);
          worst = std::max(worst, relative(col[i], ref));
          ++compared;
          if (r >= 0.05 && rho >= 0.05 && a <= 1e-3) worst_inf = std::max(worst_inf, relative(col[i], sector_green(order, r, rho)));
        }
      }
    }
    const std::string which = coupling == 0.0 ? "order l+1/2" : "order sqrt(l(l+1))";
    const std::string name = coupling == 0.0 ? "resolvent-difference/bessel-free" : "resolvent-difference/bessel-critical";
    const std::string anchor = "sector resolvent kernels are modified Bessel pairs I_nu K_nu, " + which;
    rep.check(name + "/interval-kernel", anchor, worst, "<=", 1e-3, std::to_string(compared) + " interior nodes, l <= 6");
    rep.check(name + "/half-line-kernel", anchor, worst_inf, "<=", 1e-3, "radii >= 0.05");
    oracle.push_back({{"coupling", json_number(coupling)}, {"max_relative_error", json_number(worst)},
                      {"max_relative_error_half_line", json_number(worst_inf)}, {"compared", compared}});
  }
  const double nu1 = BesselOrder::for_coupling(0.25, 1).nu;
  rep.check("resolvent-difference/order-l=1", "H-order at l = 1 is sqrt 2", std::abs(nu1 - std::numbers::sqrt2), "<=",
            0.0);

  // Both routes to G(z, y) at seeded points.
  const ResolventDifference rd(grid, cfg.l_max);
  std::mt19937_64 rng(cfg.seed);
  const double lo = std::max(0.01, 10.0 * a), hi = std::min(20.0, b / 3.0);
  std::uniform_real_distribution<double> logr(std::log(lo), std::log(hi)), cosd(-1.0, 1.0);
  double worst = 0.0;
  json samples = json::array();
  for (int k = 0; k < 16; ++k) {
    const double z = std::exp(logr(rng)), y = std::exp(logr(rng)), c = cosd(rng);
    const auto d = rd.evaluate(z, y, c, DifferenceMethod::direct);
    const auto i = rd.evaluate(z, y, c, DifferenceMethod::identity);
    const bool compared = std::abs(d.value) > 1e-10;
    if (compared) worst = std::max(worst, relative(i.value, d.value));
    samples.push_back({{"z", json_number(z)}, {"y", json_number(y)}, {"cos", json_number(c)},
                       {"direct", json_number(d.value)}, {"identity", json_number(i.value)}, {"compared", compared}});
  }
  rep.check("resolvent-difference/direct-vs-identity", "second resolvent identity for (H+1)^{-1} - (-Delta+1)^{-1}", worst,
            "<=", 1e-3, "16 seeded points");

  // Envelope ratio on the lattice and on a refined lattice.
  const auto ps = p_list(cfg, {0.0, 0.5, -0.5, 1.0, -1.0, 1.35, -1.35});
  const auto coarse = difference_bound_lattice(ps, 7, cfg.l_max);
  const auto fine = difference_bound_lattice(ps, 13, cfg.l_max);
  json lattice = json::array();
  for (std::size_t k = 0; k < ps.size(); ++k) {
    const std::string name = "resolvent-difference/lattice/p=" + num(ps[k]);
    const std::string anchor = "|G(z,y)| <~ (min/(|z|+|y|))^p (|z|^{-1} ^ |z|^{-1/2}) (|y|^{-1} ^ |y|^{-1/2})";
    rep.report(name + "/max-ratio", anchor, fine.max_ratio[k], "13 x 13 x 3 lattice");
    rep.check(name + "/refinement-growth", anchor, fine.max_ratio[k] / coarse.max_ratio[k], "<", 1.5,
              "13-point over 7-point lattice");
    lattice.push_back({{"p", json_number(ps[k])}, {"max_ratio", json_number(fine.max_ratio[k])},
                       {"max_ratio_coarse", json_number(coarse.max_ratio[k])}});
  }
  for (std::size_t k = 0; k < ps.size(); ++k)
    for (double c : {1.0, 0.0, -1.0})
      for (const auto &pt : fine.points) {
        if (pt.cos_angle != c) continue;
        const std::string label = "p=" + num(ps[k]) + " cos=" + num(c) + " y=" + num(pt.y_radius);
        if (rep.series.empty() || rep.series.back().label != label) rep.add_series("kernel_ratio_grid", label);
        rep.series.back().points.push_back({pt.z_radius, pt.ratio[k]});
      }
  rep.data["resolvent_difference"] = {{"bessel_oracle", oracle},
                                      {"order_l1", json_number(nu1)},
                                      {"direct_vs_identity", samples},
                                      {"lattice", lattice},
                                      {"lattice_truncation_warning", fine.truncation_warning}};
}

struct KnownVerdict {
  const char *q, *s;
  bool admissible;
  std::optional<Rational> condition1, condition2;
};

const KnownVerdict kKnown[] = {
    {"2", "6", true, Rational(4, 3), Rational(1, 2)},
    {"2", "inf", true, std::nullopt, std::nullopt},
    {"1", "1", false, std::nullopt, std::nullopt},
};

bool same_verdict(const RegionVerdict &a, const RegionVerdict &b) {
  return a.admissible == b.admissible && a.condition1 == b.condition1 && a.condition2 == b.condition2 &&
         a.certificate.empty == b.certificate.empty;
}

void run_region(const RunConfig &cfg, Report &rep) {
  const std::string anchor = "admissible region: 4/3 <= 1/q + 1/s' <= 5/3 and max of four terms < sqrt 2";
  json verdicts = json::array();
  for (const auto &q : pair_list(cfg, {{"2", "6"}, {"2", "inf"}, {"1", "2"}, {"1", "1"}})) {
    const auto v = region_check(q);
    const std::string name = "region/" + pair_label(q);
    rep.report(name + "/admissible", anchor, v.admissible ? 1.0 : 0.0);
    rep.check(name + "/certificate-nonempty-iff-admissible", "nonempty weight interval on admissible pairs",
              (v.admissible == !v.certificate.empty) ? 0.0 : 1.0, "<=", 0.0);
    rep.check(name + "/duality", "region(q,s) = region(s',q')", same_verdict(v, region_check(dual_query(q))) ? 0.0 : 1.0,
              "<=", 0.0);
    for (const auto &k : kKnown) {
      if (!(Exponent::parse(k.q) == q.q && Exponent::parse(k.s) == q.s)) continue;
      int mismatch = v.admissible != k.admissible;
      if (k.condition1) mismatch += v.condition1 != *k.condition1;
      if (k.condition2) mismatch += v.condition2 != *k.condition2;
      rep.check(name + "/expected-verdict", k.admissible ? "pair stated admissible" : "pair outside the region",
                mismatch, "<=", 0.0);
    }
    verdicts.push_back(to_json(v));
  }

  // Duality on seeded rational pairs.
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> den(1, 12), inf(0, 9);
  int mismatches = 0, admissible = 0;
  json sweep = json::array();
  for (int k = 0; k < 50; ++k) {
    auto pick = [&] {
      if (inf(rng) == 0) return Exponent::infinity();
      const int d = den(rng);
      return Exponent::finite(Rational(d + std::uniform_int_distribution<int>(0, 3 * d)(rng), d));
    };
    RegionQuery q{pick(), pick()};
    const auto v = region_check(q);
    const bool same = same_verdict(v, region_check(dual_query(q)));
    mismatches += !same;
    admissible += v.admissible;
    sweep.push_back({{"q", q.q.str()}, {"s", q.s.str()}, {"admissible", v.admissible}});
  }
  rep.check("region/duality-sweep", "region(q,s) = region(s',q')", mismatches, "<=", 0.0,
            "50 seeded rational pairs, " + std::to_string(admissible) + " admissible");
  rep.data["region"] = {{"verdicts", verdicts}, {"duality_sweep", sweep}};
}

void run_schur(const RunConfig &cfg, Report &rep) {
  json out = json::array();
  for (const auto &q : pair_list(cfg, {{"2", "6"}})) {
    for (double p : p_list(cfg, {1.0, 0.0})) {
      const auto cert = schur_certificate(q, p, cfg.depth);
      const std::string name = "schur/" + pair_label(q) + "/p=" + num(p);
      const std::string anchor = "dyadic Schur test: geometric sums in the three ordered regions";
      json cases = json::array();
      int divergent = 0;
      for (const auto &c : cert.cases) {
        const std::string cname = name + "/case-" + std::to_string(c.region);
        if (c.convergent) {
          double dev = 0.0;
          for (const auto &r : c.ratios) dev = std::max(dev, std::abs(r.observed - r.analytic));
          rep.check(cname + "/tail-ratio-deviation", anchor, dev, "<=", 1e-12);
        } else {
          ++divergent;
        }
        auto &s = rep.add_series("refinement_trails", "schur " + pair_label(q) + " p=" + num(p) + " case " +
                                                          std::to_string(c.region));
        for (std::size_t k = 0; k < c.bound_trail.size(); ++k) s.points.push_back({double(k), c.bound_trail[k]});
        json ratios = json::array();
        for (const auto &r : c.ratios)
          ratios.push_back({{"direction", std::string(1, r.direction)}, {"exponent", json_number(r.exponent)},
                            {"analytic", json_number(r.analytic)}, {"observed", json_number(r.observed)}});
        cases.push_back({{"region", c.region}, {"convergent", c.convergent}, {"bound", json_number(c.bound)},
                         {"growth_exponent", json_number(c.growth_exponent)}, {"ratios", ratios}});
      }
      const double alpha1 = p + 3.0 * q.q.reciprocal().numerator() / double(q.q.reciprocal().denominator()) - 2.0;
      if (cert.p_in_interval)
        rep.check(name + "/certified", "p in the certificate interval gives a finite Schur bound", divergent, "<=", 0.0);
      else
        rep.report(name + "/divergent-cases", "weights outside the interval", divergent);
      if (alpha1 <= 0.0)
        rep.check(name + "/case-1-diverges", "case (1) sum diverges when p + 3/q - 2 <= 0",
                  cert.cases[0].convergent ? 1.0 : 0.0, "<=", 0.0, "negative control");
      rep.report(name + "/bound", anchor, cert.certified ? cert.bound : std::nan(""));
      out.push_back({{"q", q.q.str()}, {"s", q.s.str()}, {"p", json_number(p)}, {"depth", cert.depth},
                     {"p_in_interval", cert.p_in_interval}, {"certified", cert.certified},
                     {"bound", json_number(cert.bound)}, {"cases", cases}});
    }
  }
  rep.data["schur"] = out;
}

void run_norms(const RunConfig &cfg, Report &rep) {
  const OperatorTag op = parse_operator_tag(cfg.op);
  NormOptions opt;
  opt.grid = base_grid(cfg);
  opt.l_max = cfg.l_max;
  opt.refine = cfg.refine > 1;
  std::optional<double> n2inf, n12;
  json out = json::array();
  for (const auto &q : pair_list(cfg, {{"2", "6"}, {"2", "inf"}, {"1", "2"}})) {
    const auto r = estimate_norm(op, q.q, q.s, opt);
    const std::string name = "norms/" + cfg.op + "/" + pair_label(q);
    const std::string anchor = "resolvent difference bounded from L^q to L^s on admissible pairs";
    rep.report(name + "/estimate", anchor, r.estimate, to_string(r.method));
    rep.check(name + "/lower-over-upper", "lower and upper estimates ordered", r.lower / r.upper, "<=", 1.0 + 1e-12);
    if (opt.refine) rep.check(name + "/trail-deviation", anchor, r.trail_deviation, "<=", 0.10);
    if (q.q == Exponent::finite(2) && q.s.is_infinite()) n2inf = r.estimate;
    if (q.q == Exponent::finite(1) && q.s == Exponent::finite(2)) n12 = r.estimate;
    auto &s = rep.add_series("refinement_trails", "norm " + cfg.op + " " + pair_label(q));
    json trail = json::array();
    for (std::size_t k = 0; k < r.trail.size(); ++k) {
      const auto &e = r.trail[k];
      s.points.push_back({double(k), e.value});
      trail.push_back({{"label", e.label}, {"r_min", json_number(e.r_min)}, {"r_max", json_number(e.r_max)},
                       {"n", e.n}, {"value", json_number(e.value)}});
    }
    out.push_back({{"q", q.q.str()}, {"s", q.s.str()}, {"method", to_string(r.method)},
                   {"estimate", json_number(r.estimate)}, {"lower", json_number(r.lower)},
                   {"upper", json_number(r.upper)}, {"trail_deviation", json_number(r.trail_deviation)},
                   {"argmax_radius", json_number(r.argmax_radius)}, {"argmax_sector", r.argmax_sector},
                   {"truncation_warning", r.truncation_warning}, {"trail", trail}});
  }
  if (n2inf && n12)
    rep.check("norms/" + cfg.op + "/dual-pair", "||T||_{2,inf} = ||T*||_{1,2} for the symmetric kernel",
              relative(*n12, *n2inf), "<=", 1e-6);
  rep.data["norms"] = out;
}

void bernstein_variant(const RunConfig &cfg, Report &rep, double coupling, bool projection, json &out) {
  BernsteinOptions opt;
  opt.grid = base_grid(cfg);
  opt.l_max = cfg.l_max;
  opt.t = cfg.t;
  opt.coupling = coupling;
  opt.projection = projection;
  opt.r_min_halvings = cfg.refine - 1;
  const auto r = bernstein_sup(opt);
  const std::string tag = "a=" + num(coupling) + (projection ? " P-perp" : " full");
  const std::string name = "bernstein/" + tag;
  const std::string anchor = "sup |e^{-tH} P-perp (x,y)| <~ t^{-3/2}";
  rep.report(name + "/sup", anchor, r.sup);
  auto &s = rep.add_series("refinement_trails", "bernstein " + tag);
  json trail = json::array();
  for (const auto &e : r.trail) {
    s.points.push_back({e.r_min, e.sup});
    trail.push_back({{"r_min", json_number(e.r_min)}, {"n", e.n}, {"sup", json_number(e.sup)}});
  }
  const double growth = r.trail.empty() ? std::nan("") : r.trail.back().sup / r.trail.front().sup;
  if (projection) {
    if (cfg.refine > 1) rep.check(name + "/r_min-halving-change", anchor, r.trail_deviation, "<=", 0.05);
  } else if (coupling == 0.0) {
    const double gauss = std::pow(4.0 * kPi * cfg.t, -1.5);
    rep.check(name + "/gaussian-deviation", "free heat kernel (4 pi t)^{-3/2} e^{-|x-y|^2/4t}", relative(r.sup, gauss),
              "<=", 0.02);
  } else {
    rep.report(name + "/growth", "the estimate fails in the absence of the projection", growth,
               "last over first sup along r_min halving");
  }
  if (r.product) rep.report(name + "/product-bound", "factorisation through (H+1)^{-1} P", *r.product);
  rep.report(name + "/spectral-factor", "sup_l e^{-tl}(l+1)^2", r.spectral_factor, "bound " + num(r.spectral_bound));
  out.push_back({{"coupling", json_number(coupling)}, {"projection", projection}, {"t", json_number(cfg.t)},
                 {"sup", json_number(r.sup)}, {"trail_deviation", json_number(r.trail_deviation)},
                 {"growth", json_number(growth)}, {"spectral_factor", json_number(r.spectral_factor)},
                 {"product", r.product ? json_number(*r.product) : json(nullptr)},
                 {"argmax", {{"r", json_number(r.base.r)}, {"rho", json_number(r.base.rho)},
                             {"cos", json_number(r.base.cos_angle)}}},
                 {"truncation_warning", r.truncation_warning}, {"trail", trail}});
}

void run_bernstein(const RunConfig &cfg, Report &rep, bool controls) {
  json out = json::array();
  bernstein_variant(cfg, rep, cfg.coupling, cfg.projection, out);
  if (controls) {
    if (cfg.projection) bernstein_variant(cfg, rep, cfg.coupling, false, out);
    if (cfg.coupling != 0.0 || cfg.projection) bernstein_variant(cfg, rep, 0.0, false, out);
  }
  rep.data["bernstein"] = out;
}

void dispatch(Command c, const RunConfig &cfg, Report &rep, bool in_suite) {
  switch (c) {
  case Command::hardy: return run_hardy(cfg, rep);
  case Command::positivity: return run_positivity(cfg, rep);
  case Command::combes_thomas: return run_combes_thomas(cfg, rep);
  case Command::weighted_resolvent: return run_weighted_resolvent(cfg, rep);
  case Command::kernel_bounds: return run_kernel_bounds(cfg, rep);
  case Command::resolvent_difference: return run_resolvent_difference(cfg, rep);
  case Command::region: return run_region(cfg, rep);
  case Command::schur: return run_schur(cfg, rep);
  case Command::norms: return run_norms(cfg, rep);
  case Command::bernstein: return run_bernstein(cfg, rep, in_suite);
  case Command::all: break;
  }
}

// Pairs and p-lists only apply to the commands that consume them when the
// whole suite runs.
RunConfig suite_config(const RunConfig &cfg, Command c) {
  RunConfig out = cfg;
  out.command = c;
  if (cfg.command != Command::all) return out;
  out.p_values.clear();
  out.pairs.clear();
  out.sector = -1;
  return out;
}

} // namespace

// ---------------------------------------------------------------------------

std::string to_string(Command c) {
  for (const auto &e : kCommands)
    if (e.c == c) return e.name;
  return "?";
}

Command parse_command(const std::string &name) {
  for (const auto &e : kCommands)
    if (name == e.name) return e.c;
  throw ConfigError("unknown command '" + name + "'");
}

const std::vector<Command> &suite_commands() {
  static const std::vector<Command> v{Command::hardy,          Command::positivity,
                                      Command::combes_thomas, Command::weighted_resolvent,
                                      Command::kernel_bounds, Command::resolvent_difference,
                                      Command::region,        Command::schur,
                                      Command::norms,         Command::bernstein};
  return v;
}

void RunConfig::validate() const {
  if (!(r_min > 0.0) || !std::isfinite(r_min)) throw ConfigError("r_min must be positive");
  if (!(r_max > r_min) || !std::isfinite(r_max)) throw ConfigError("r_max must exceed r_min");
  if (n < 16) throw ConfigError("n must be at least 16");
  if (l_max < 1) throw ConfigError("l_max must be at least 1");
  if (sector < -1) throw ConfigError("sector must be >= 0 (or -1 for the default set)");
  if (refine < 1) throw ConfigError("refine must be at least 1");
  if (!(coupling <= 0.25) || !std::isfinite(coupling)) throw ConfigError("coupling must be at most 1/4");
  if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("t must be positive");
  if (depth < 1) throw ConfigError("depth must be at least 1");
  if (ct_n < 16) throw ConfigError("ct_n must be at least 16");
  for (double p : p_values)
    if (!std::isfinite(p)) throw ConfigError("p values must be finite");
  if (command == Command::kernel_bounds)
    for (double p : p_values)
      if (std::abs(p) >= 1.5) throw ConfigError("kernel-bounds needs |p| < 3/2");
  try {
    parse_operator_tag(op);
  } catch (const InvalidRange &) {
    throw ConfigError("unknown operator '" + op + "'");
  }
  for (const auto &pr : pairs) {
    RegionQuery q;
    try {
      q = to_query(pr);
    } catch (const InvalidRange &e) {
      throw ConfigError(std::string("pairs: ") + e.what());
    }
    if (command == Command::norms && !(q.q == Exponent::finite(2) || q.s == Exponent::finite(2)))
      throw ConfigError("norms: pair " + pair_label(q) + " has neither exponent equal to 2");
  }
}

json RunConfig::to_json() const {
  json pj = json::array();
  for (const auto &[q, s] : pairs) pj.push_back({q, s});
  return {{"command", isq::to_string(command)},
          {"r_min", r_min},
          {"r_max", r_max},
          {"n", n},
          {"l_max", l_max},
          {"p", p_values},
          {"pairs", pj},
          {"sector", sector},
          {"refine", refine},
          {"projection", projection},
          {"coupling", coupling},
          {"t", t},
          {"depth", depth},
          {"op", op},
          {"ct_n", ct_n},
          {"seed", seed},
          {"output_dir", output_dir},
          {"format", format == OutputFormat::json ? "json" : "csv"}};
}

RunConfig RunConfig::from_json(const json &j) {
  RunConfig c;
  try {
    c.command = parse_command(j.at("command").get<std::string>());
    c.r_min = j.at("r_min").get<double>();
    c.r_max = j.at("r_max").get<double>();
    c.n = j.at("n").get<std::size_t>();
    c.l_max = j.at("l_max").get<int>();
    c.p_values = j.at("p").get<std::vector<double>>();
    c.pairs.clear();
    for (const auto &pr : j.at("pairs")) c.pairs.emplace_back(pr.at(0).get<std::string>(), pr.at(1).get<std::string>());
    c.sector = j.at("sector").get<int>();
    c.refine = j.at("refine").get<int>();
    c.projection = j.at("projection").get<bool>();
    c.coupling = j.at("coupling").get<double>();
    c.t = j.at("t").get<double>();
    c.depth = j.at("depth").get<int>();
    c.op = j.at("op").get<std::string>();
    c.ct_n = j.at("ct_n").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.output_dir = j.at("output_dir").get<std::string>();
    const auto f = j.at("format").get<std::string>();
    if (f != "json" && f != "csv") throw ConfigError("format must be json or csv");
    c.format = f == "json" ? OutputFormat::json : OutputFormat::csv;
  } catch (const json::exception &e) {
    throw ConfigError(std::string("config JSON: ") + e.what());
  }
  return c;
}

std::string RunConfig::to_key_value() const {
  std::ostringstream os;
  std::string ps, prs;
  for (std::size_t k = 0; k < p_values.size(); ++k) ps += (k ? "," : "") + exact(p_values[k]);
  for (std::size_t k = 0; k < pairs.size(); ++k) prs += (k ? "," : "") + pairs[k].first + ":" + pairs[k].second;
  os << "command = " << isq::to_string(command) << '\n'
     << "r_min = " << exact(r_min) << '\n'
     << "r_max = " << exact(r_max) << '\n'
     << "n = " << n << '\n'
     << "l_max = " << l_max << '\n'
     << "p = " << ps << '\n'
     << "pairs = " << prs << '\n'
     << "sector = " << sector << '\n'
     << "refine = " << refine << '\n'
     << "projection = " << (projection ? "true" : "false") << '\n'
     << "coupling = " << exact(coupling) << '\n'
     << "t = " << exact(t) << '\n'
     << "depth = " << depth << '\n'
     << "op = " << op << '\n'
     << "ct_n = " << ct_n << '\n'
     << "seed = " << seed << '\n'
     << "output_dir = " << output_dir << '\n'
     << "format = " << (format == OutputFormat::json ? "json" : "csv") << '\n';
  return os.str();
}

RunConfig RunConfig::from_key_value(const std::string &text, RunConfig c) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    try {
      if (key == "command") c.command = parse_command(value);
      else if (key == "r_min") c.r_min = parse_double(key, value);
      else if (key == "r_max") c.r_max = parse_double(key, value);
      else if (key == "n") c.n = parse_unsigned(key, value);
      else if (key == "l_max") c.l_max = int(parse_integer(key, value));
      else if (key == "p") {
        c.p_values.clear();
        for (const auto &v : split(value, ',')) c.p_values.push_back(parse_double(key, v));
      } else if (key == "pairs") {
        c.pairs.clear();
        for (const auto &v : split(value, ',')) c.pairs.push_back(parse_pair(v));
      } else if (key == "sector") c.sector = int(parse_integer(key, value));
      else if (key == "refine") c.refine = int(parse_integer(key, value));
      else if (key == "projection") c.projection = parse_bool(key, value);
      else if (key == "coupling") c.coupling = parse_double(key, value);
      else if (key == "t") c.t = parse_double(key, value);
      else if (key == "depth") c.depth = int(parse_integer(key, value));
      else if (key == "op") c.op = value;
      else if (key == "ct_n") c.ct_n = parse_unsigned(key, value);
      else if (key == "seed") c.seed = parse_unsigned(key, value);
      else if (key == "output_dir") c.output_dir = value;
      else if (key == "format") {
        if (value != "json" && value != "csv") throw ConfigError("format must be json or csv");
        c.format = value == "json" ? OutputFormat::json : OutputFormat::csv;
      } else
        throw ConfigError("unknown key '" + key + "'");
    } catch (const ConfigError &e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path &path, RunConfig base) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return from_key_value(ss.str(), std::move(base));
}

RunResult run(const RunConfig &config) {
  RunResult res;
  try {
    config.validate();
  } catch (const ConfigError &e) {
    res.exit_code = 2;
    res.message = e.what();
    return res;
  }
  res.report.config = config.to_json();
  std::vector<Command> commands{config.command};
  if (config.command == Command::all) commands = suite_commands();
  for (Command c : commands) {
    const auto start = std::chrono::steady_clock::now();
    try {
      dispatch(c, suite_config(config, c), res.report, config.command == Command::all);
    } catch (const Error &e) {
      res.report.fail(to_string(c) + "/numerical-failure", "", e.what());
    }
    res.report.seconds[to_string(c)] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  res.failed = res.report.failures();
  if (!res.failed.empty()) {
    res.exit_code = 3;
    res.message = "failed: ";
    for (std::size_t k = 0; k < res.failed.size(); ++k) res.message += (k ? ", " : "") + res.failed[k];
  }
  return res;
}

std::string report_text(const Report &report) { return to_json(report).dump(2) + "\n"; }

std::vector<std::filesystem::path> write_outputs(const RunResult &result, const RunConfig &config) {
  const std::filesystem::path dir = config.output_dir;
  auto paths = emit_plotdata(result.report, dir);
  const auto write = [&](const std::filesystem::path &path, auto &&body) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path.string());
    body(os);
    if (!os) throw IoError("write failed for " + path.string());
    paths.push_back(path);
  };
  if (config.format == OutputFormat::json)
    write(dir / "report.json", [&](std::ostream &os) { os << report_text(result.report); });
  else
    write(dir / "report.csv", [&](std::ostream &os) { write_records_csv(result.report, os); });
  write(dir / "timing.json", [&](std::ostream &os) {
    json t = json::object();
    for (const auto &[k, v] : result.report.seconds) t[k] = v;
    os << t.dump(2) << '\n';
  });
  return paths;
}

} // namespace isq
