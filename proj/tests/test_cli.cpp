#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "isq/error.hpp"
#include "isq/run.hpp"

using namespace isq;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path &p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string &name) {
  const auto dir = fs::temp_directory_path() / ("isq_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int exit_status(const std::string &args) {
  const std::string cmd = std::string(ISQ_VERIFY_PATH) + " " + args + " > /dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

const CheckRecord *find(const Report &r, const std::string &name) {
  for (const auto &rec : r.records)
    if (rec.name == name) return &rec;
  return nullptr;
}

} // namespace

TEST_CASE("config round trip through key-value text and JSON") {
  RunConfig c;
  c.command = Command::schur;
  c.r_min = 0.1;
  c.r_max = 1.0 / 3.0;
  c.n = 777;
  c.l_max = 9;
  c.p_values = {-1.35, 0.1, 1e-17, 2.0 / 3.0};
  c.pairs = {{"2", "6"}, {"3/2", "inf"}, {"1.25", "4"}};
  c.sector = 2;
  c.refine = 4;
  c.projection = false;
  c.coupling = 0.1;
  c.t = 0.7;
  c.depth = 12;
  c.op = "free-resolvent";
  c.ct_n = 99;
  c.seed = 18446744073709551615ull;
  c.output_dir = "/tmp/x y";
  c.format = OutputFormat::csv;

  const auto kv = RunConfig::from_key_value(c.to_key_value());
  CHECK(kv.to_json() == c.to_json());
  CHECK(kv.r_max == c.r_max);
  CHECK(kv.p_values == c.p_values);
  CHECK(kv.seed == c.seed);
  const auto js = RunConfig::from_json(nlohmann::json::parse(c.to_json().dump()));
  CHECK(js.to_json() == c.to_json());
  CHECK(js.to_key_value() == c.to_key_value());

  // Defaults survive an empty file and comments.
  const auto d = RunConfig::from_key_value("# nothing\n\n  \n");
  CHECK(d.to_json() == RunConfig{}.to_json());
  CHECK(d.r_min == 1e-3);
  CHECK(d.r_max == 60.0);
  CHECK(d.n == 4096);
  CHECK(d.l_max == 32);
  CHECK(d.seed == 0);

  const auto partial = RunConfig::from_key_value("n = 128 # coarse\np = 1, -1\n", c);
  CHECK(partial.n == 128);
  CHECK(partial.p_values == std::vector<double>{1.0, -1.0});
  CHECK(partial.depth == c.depth);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(RunConfig::from_key_value("bogus = 1"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_key_value("n = 12x"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_key_value("r_min = abc"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_key_value("no equals sign"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_key_value("command = sideways"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_key_value("pairs = 2-6"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_key_value("projection = maybe"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_key_value("seed = -4"), ConfigError);
  CHECK_THROWS_AS(RunConfig::load("/nonexistent/isq.cfg"), ConfigError);

  const auto bad = [](auto mutate) {
    RunConfig c;
    c.command = Command::region;
    mutate(c);
    return run(c).exit_code;
  };
  CHECK(bad([](RunConfig &c) { c.r_min = 0.0; }) == 2);
  CHECK(bad([](RunConfig &c) { c.r_max = 1e-4; }) == 2);
  CHECK(bad([](RunConfig &c) { c.n = 8; }) == 2);
  CHECK(bad([](RunConfig &c) { c.coupling = 0.3; }) == 2);
  CHECK(bad([](RunConfig &c) { c.t = -1.0; }) == 2);
  CHECK(bad([](RunConfig &c) { c.op = "nope"; }) == 2);
  CHECK(bad([](RunConfig &c) { c.pairs = {{"0.5", "2"}}; }) == 2);
  CHECK(bad([](RunConfig &c) {
          c.command = Command::norms;
          c.pairs = {{"3", "6"}};
        }) == 2);
  CHECK(bad([](RunConfig &c) {
          c.command = Command::kernel_bounds;
          c.p_values = {1.5};
        }) == 2);
}

TEST_CASE("region (2,6): admissible with a nonempty certificate") {
  RunConfig c;
  c.command = Command::region;
  c.pairs = {{"2", "6"}};
  const auto res = run(c);
  CHECK(res.exit_code == 0);
  const auto j = nlohmann::json::parse(report_text(res.report));
  const auto &v = j["data"]["region"]["verdicts"][0];
  CHECK(v["admissible"] == true);
  CHECK(v["condition1"] == "4/3");
  CHECK(v["condition2"] == "1/2");
  REQUIRE(v["certificate_p_interval"].is_object());
  CHECK(v["certificate_p_interval"]["lower"] == "1/2");
  CHECK(v["certificate_p_interval"]["upper"] == "sqrt(2)");
  CHECK(v["certificate_p_interval"]["lower_value"].get<double>() <
        v["certificate_p_interval"]["upper_value"].get<double>());
  CHECK(j["config"] == c.to_json());
  CHECK(j["summary"]["fail"] == 0);
  for (const auto &r : j["records"]) CHECK_FALSE(r["anchor"].get<std::string>().empty());
}

TEST_CASE("hardy sector 1 with three refinement levels") {
  RunConfig c;
  c.command = Command::hardy;
  c.sector = 1;
  c.refine = 3;
  const auto res = run(c);
  CHECK(res.exit_code == 0);
  const auto &trail = res.report.data["hardy"][0]["trail"];
  REQUIRE(trail.size() == 3);
  double prev = INFINITY;
  for (const auto &e : trail) {
    const double v = e["constant"].get<double>();
    CHECK(v <= prev);
    CHECK(std::abs(v - 2.25) <= 0.05 * 2.25);
    prev = v;
  }
  const auto *rec = find(res.report, "hardy/l=1/relative-deviation");
  REQUIRE(rec);
  CHECK(rec->status == CheckStatus::pass);
  CHECK(rec->threshold == 0.05);
}

TEST_CASE("bernstein without the projection is report-only growth") {
  RunConfig c;
  c.command = Command::bernstein;
  c.projection = false;
  c.n = 768;
  c.r_max = 30.0;
  c.l_max = 8;
  c.refine = 2;
  const auto res = run(c);
  CHECK(res.exit_code == 0);
  const auto *rec = find(res.report, "bernstein/a=0.25 full/growth");
  REQUIRE(rec);
  CHECK(rec->status == CheckStatus::report_only);
  CHECK(rec->observed > 1.3);
  for (const auto &r : res.report.records)
    if (r.name.rfind("bernstein/", 0) == 0) CHECK(r.status != CheckStatus::fail);
}

TEST_CASE("identical config and seed give byte-identical JSON") {
  RunConfig c;
  c.command = Command::resolvent_difference;
  c.n = 512;
  c.l_max = 6;
  c.seed = 7;
  const auto a = report_text(run(c).report);
  const auto b = report_text(run(c).report);
  CHECK(a == b);
  c.seed = 8;
  CHECK(report_text(run(c).report) != a);

  RunConfig r;
  r.command = Command::region;
  r.seed = 3;
  CHECK(report_text(run(r).report) == report_text(run(r).report));
}

TEST_CASE("report numbers are rounded to 12 significant digits") {
  CHECK(fixed12(1.0 / 3.0) == 0.333333333333);
  CHECK(fixed12(2.0 / 3.0 * 1e-20) == 6.66666666667e-21);
  CHECK(json_number(NAN).is_null());
  CHECK(json_number(INFINITY).is_null());
  Report r;
  r.check("x", "anchor", 1.0 / 7.0, "<", 1.0);
  CHECK(to_json(r)["records"][0]["observed"].dump() == "0.142857142857");
  CHECK_FALSE(to_json(r).contains("seconds"));
}

TEST_CASE("record statuses") {
  Report r;
  r.check("a", "x", 1.0, "<=", 1.0);
  r.check("b", "x", 1.0, "<", 1.0);
  r.check("c", "x", NAN, ">=", 0.0);
  r.report("d", "x", 5.0);
  CHECK(r.records[0].status == CheckStatus::pass);
  CHECK(r.records[1].status == CheckStatus::fail);
  CHECK(r.records[2].status == CheckStatus::fail);
  CHECK(r.records[3].status == CheckStatus::report_only);
  CHECK(r.failures() == std::vector<std::string>{"b", "c"});
  CHECK_THROWS_AS(r.check("e", "x", 1.0, "~", 1.0), InvalidRange);
}

TEST_CASE("empty report gives header-only CSV files") {
  const auto dir = scratch("empty");
  const auto paths = emit_plotdata(Report{}, dir);
  REQUIRE(paths.size() == 3);
  for (const auto &p : paths) CHECK(slurp(p) == "x,y,series\n");
  std::ostringstream os;
  write_records_csv(Report{}, os);
  CHECK(os.str() == "name,anchor,observed,threshold,relation,status,note\n");

  const auto blocked = dir / "file";
  std::ofstream(blocked) << "x";
  try {
    emit_plotdata(Report{}, blocked / "sub");
    FAIL("expected IoError");
  } catch (const IoError &e) {
    CHECK(std::string(e.what()).find(blocked.string()) != std::string::npos);
  }
}

TEST_CASE("plot data: margin curve and ratio heatmap") {
  const auto dir = scratch("plot");
  RunConfig c;
  c.command = Command::combes_thomas;
  c.n = 512;
  c.ct_n = 96;
  c.l_max = 4;
  c.p_values = {0.0, 1.0};
  c.output_dir = dir.string();
  const auto res = run(c);
  write_outputs(res, c);
  const auto margin = slurp(dir / "margin_curve.csv");
  CHECK(margin.rfind("x,y,series\n", 0) == 0);
  CHECK(margin.find(",1 - p^2/2\n") != std::string::npos);
  CHECK(margin.find("1.350000000000e+00,8.875000000000e-02,1 - p^2/2") != std::string::npos);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "timing.json"));
  CHECK(nlohmann::json::parse(slurp(dir / "timing.json")).contains("combes-thomas"));

  RunConfig k;
  k.command = Command::resolvent_difference;
  k.n = 512;
  k.l_max = 6;
  k.p_values = {1.0};
  const auto rd = run(k);
  const auto hdir = scratch("heat");
  emit_plotdata(rd.report, hdir);
  std::istringstream heat(slurp(hdir / "kernel_ratio_grid.csv"));
  std::string line;
  std::getline(heat, line);
  CHECK(line == "x,y,series");
  int rows = 0;
  while (std::getline(heat, line)) {
    CHECK(line.find("p=1 cos=") != std::string::npos);
    ++rows;
  }
  CHECK(rows == 13 * 13 * 3);
}

TEST_CASE("csv report format") {
  RunConfig c;
  c.command = Command::schur;
  c.format = OutputFormat::csv;
  c.output_dir = scratch("csv").string();
  const auto res = run(c);
  write_outputs(res, c);
  const auto text = slurp(fs::path(c.output_dir) / "report.csv");
  CHECK(text.rfind("name,anchor,observed", 0) == 0);
  CHECK(text.find("schur/(2,6)/p=0/case-1-diverges") != std::string::npos);
  CHECK_FALSE(fs::exists(fs::path(c.output_dir) / "report.json"));
}

TEST_CASE("schur command: certified weight and divergent control") {
  RunConfig c;
  c.command = Command::schur;
  const auto res = run(c);
  CHECK(res.exit_code == 0);
  const auto &d = res.report.data["schur"];
  REQUIRE(d.size() == 2);
  CHECK(d[0]["p"] == 1.0);
  CHECK(d[0]["certified"] == true);
  CHECK(d[1]["p"] == 0.0);
  CHECK(d[1]["cases"][0]["convergent"] == false);
}

TEST_CASE("failed threshold gives exit code 3 naming the check") {
  RunConfig c;
  c.command = Command::hardy;
  c.sector = 0;
  c.r_min = 0.5;
  c.r_max = 2.0;
  c.n = 64;
  c.refine = 1;
  const auto res = run(c);
  CHECK(res.exit_code == 3);
  REQUIRE(res.failed.size() == 1);
  CHECK(res.failed[0] == "hardy/l=0/relative-deviation");
  CHECK(res.message.find("hardy/l=0/relative-deviation") != std::string::npos);
}

TEST_CASE("command-line driver exit codes and flag precedence") {
  CHECK(exit_status("region --q 2 --s 6") == 0);
  CHECK(exit_status("--help") == 0);
  CHECK(exit_status("sideways") == 2);
  CHECK(exit_status("region --q 2") == 2);
  CHECK(exit_status("region --q 0.5 --s 2") == 2);
  CHECK(exit_status("region --bogus") == 2);
  CHECK(exit_status("region --config /nonexistent/file") == 2);
  CHECK(exit_status("hardy --sector 0 --r-min 0.5 --r-max 2 --n 64 --refine 1") == 3);

  const auto dir = scratch("flags");
  const auto cfg = dir / "run.cfg";
  std::ofstream(cfg) << "r_min = 0.5\nr_max = 2\nn = 64\nrefine = 1\nsector = 0\n";
  CHECK(exit_status("hardy --config " + cfg.string()) == 3);
  // Flags override the file: the default domain passes.
  CHECK(exit_status("hardy --config " + cfg.string() + " --r-min 1e-3 --r-max 60 --n 4096 --refine 3") == 0);
  CHECK(exit_status("region --pairs 2:6,2:inf --output-dir " + (dir / "out").string()) == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "out" / "report.json"));
  CHECK(j["data"]["region"]["verdicts"].size() == 2);
  CHECK(j["config"]["output_dir"] == (dir / "out").string());
}
