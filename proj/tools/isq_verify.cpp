#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "isq/error.hpp"
#include "isq/run.hpp"

namespace {

std::vector<std::pair<std::string, std::string>> parse_pairs(const std::string &text) {
  auto cfg = isq::RunConfig::from_key_value("pairs = " + text);
  return cfg.pairs;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Numerical verification of Hardy-type and Schur-type estimates for -Delta - 1/(4|x|^2)"};
  app.option_defaults()->always_capture_default();

  std::string command, config_file, pairs, q, s, format, op;
  std::vector<double> p;
  double r_min = 0, r_max = 0, coupling = 0, t = 0;
  std::size_t n = 0, ct_n = 0;
  int l_max = 0, sector = 0, refine = 0, depth = 0;
  std::uint64_t seed = 0;
  std::string output_dir;
  bool no_projection = false, projection = false, quiet = false;

  std::string names;
  for (auto c : isq::suite_commands()) names += isq::to_string(c) + ", ";
  app.add_option("command", command, "one of: " + names + "all")->required();
  app.add_option("--config", config_file, "flat key = value file; flags override it");
  auto *o_rmin = app.add_option("--r-min", r_min, "inner radius of the grid (1e-3)");
  auto *o_rmax = app.add_option("--r-max", r_max, "outer radius of the grid (60)");
  auto *o_n = app.add_option("--n", n, "grid nodes (4096)");
  auto *o_lmax = app.add_option("--l-max", l_max, "highest angular momentum (32)");
  auto *o_p = app.add_option("--p", p, "weights, comma separated")->delimiter(',')->allow_extra_args(false);
  auto *o_pairs = app.add_option("--pairs", pairs, "exponent pairs q:s, comma separated");
  auto *o_q = app.add_option("--q", q, "single pair: q");
  auto *o_s = app.add_option("--s", s, "single pair: s");
  auto *o_sector = app.add_option("--sector", sector, "angular momentum sector");
  auto *o_refine = app.add_option("--refine", refine, "grids per refinement trail (3)");
  auto *o_proj = app.add_flag("--projection", projection, "apply P-perp (default)");
  auto *o_noproj = app.add_flag("--no-projection", no_projection, "drop P-perp");
  o_proj->excludes(o_noproj);
  auto *o_coupling = app.add_option("--coupling", coupling, "inverse-square coupling a <= 1/4 (0.25)");
  auto *o_t = app.add_option("--t", t, "heat time (1)");
  auto *o_depth = app.add_option("--depth", depth, "dyadic depth K (30)");
  auto *o_op = app.add_option("--op", op, "resolvent-difference, H-resolvent-Pperp or free-resolvent");
  auto *o_ctn = app.add_option("--ct-n", ct_n, "dense Combes-Thomas grid size (640)");
  auto *o_seed = app.add_option("--seed", seed, "sampling seed (0)");
  auto *o_out = app.add_option("--output-dir", output_dir, "write report, timing and plot CSVs here");
  auto *o_format = app.add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_flag("--quiet", quiet, "no summary on stderr");
  o_q->needs(o_s);
  o_s->needs(o_q);
  o_q->excludes(o_pairs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  isq::RunConfig cfg;
  try {
    if (!config_file.empty()) cfg = isq::RunConfig::load(config_file);
    cfg.command = isq::parse_command(command);
    if (*o_rmin) cfg.r_min = r_min;
    if (*o_rmax) cfg.r_max = r_max;
    if (*o_n) cfg.n = n;
    if (*o_lmax) cfg.l_max = l_max;
    if (*o_p) cfg.p_values = p;
    if (*o_pairs) cfg.pairs = parse_pairs(pairs);
    if (*o_q) cfg.pairs = {{q, s}};
    if (*o_sector) cfg.sector = sector;
    if (*o_refine) cfg.refine = refine;
    if (*o_proj) cfg.projection = true;
    if (*o_noproj) cfg.projection = false;
    if (*o_coupling) cfg.coupling = coupling;
    if (*o_t) cfg.t = t;
    if (*o_depth) cfg.depth = depth;
    if (*o_op) cfg.op = op;
    if (*o_ctn) cfg.ct_n = ct_n;
    if (*o_seed) cfg.seed = seed;
    if (*o_out) cfg.output_dir = output_dir;
    if (*o_format) cfg.format = format == "json" ? isq::OutputFormat::json : isq::OutputFormat::csv;
  } catch (const isq::ConfigError &e) {
    std::cerr << "isq-verify: " << e.what() << '\n';
    return 2;
  }

  const auto result = isq::run(cfg);
  if (result.exit_code == 2) {
    std::cerr << "isq-verify: " << result.message << '\n';
    return 2;
  }

  try {
    if (cfg.output_dir.empty()) {
      if (cfg.format == isq::OutputFormat::json)
        std::cout << isq::report_text(result.report);
      else
        isq::write_records_csv(result.report, std::cout);
    } else {
      for (const auto &path : isq::write_outputs(result, cfg))
        if (!quiet) std::cerr << "wrote " << path.string() << '\n';
    }
  } catch (const isq::IoError &e) {
    std::cerr << "isq-verify: " << e.what() << '\n';
    return 3;
  }

  if (!quiet) {
    for (const auto &r : result.report.records) {
      if (r.status == isq::CheckStatus::report_only) continue;
      std::fprintf(stderr, "%-4s %s (%.6g %s %.6g)\n", r.status == isq::CheckStatus::pass ? "ok" : "FAIL",
                   r.name.c_str(), r.observed, r.relation.c_str(), r.threshold.value_or(0.0));
    }
    for (const auto &[k, v] : result.report.seconds) std::fprintf(stderr, "time %s %.2f s\n", k.c_str(), v);
  }
  if (result.exit_code != 0) std::cerr << "isq-verify: " << result.message << '\n';
  return result.exit_code;
}
