#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "isq/report.hpp"

namespace isq {

enum class Command {
  hardy,
  positivity,
  combes_thomas,
  weighted_resolvent,
  kernel_bounds,
  resolvent_difference,
  region,
  schur,
  norms,
  bernstein,
  all,
};

std::string to_string(Command c);
/// Throws ConfigError on an unknown name.
Command parse_command(const std::string &name);
const std::vector<Command> &suite_commands(); // every command except `all`

enum class OutputFormat { json, csv };

struct RunConfig {
  Command command = Command::all;
  double r_min = 1e-3, r_max = 60.0;
  std::size_t n = 4096;
  int l_max = 32;
  std::vector<double> p_values;                          // empty: per-command default
  std::vector<std::pair<std::string, std::string>> pairs; // (q, s); empty: per-command default
  int sector = -1;                                        // -1: per-command default
  int refine = 3;                                         // grids in each refinement trail
  bool projection = true;
  double coupling = 0.25;
  double t = 1.0;
  int depth = 30;
  std::string op = "resolvent-difference";
  std::size_t ct_n = 640; // dense Combes-Thomas grid size
  std::uint64_t seed = 0;
  std::string output_dir;
  OutputFormat format = OutputFormat::json;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json &j);

  /// Flat `key = value` text; lists are comma separated, pairs are q:s.
  std::string to_key_value() const;
  /// Keys absent from the text keep the values already in `base`.
  static RunConfig from_key_value(const std::string &text, RunConfig base);
  static RunConfig from_key_value(const std::string &text) { return from_key_value(text, RunConfig{}); }
  static RunConfig load(const std::filesystem::path &path, RunConfig base);
  static RunConfig load(const std::filesystem::path &path) { return load(path, RunConfig{}); }
};

struct RunResult {
  Report report;
  int exit_code = 0; // 0 ok, 2 configuration error, 3 failed check or numerical failure
  std::vector<std::string> failed;
  std::string message;
};

/// Runs the command's checks. Never throws for library errors: a ConfigError
/// gives exit code 2, any other isq::Error becomes a failed record and exit 3.
RunResult run(const RunConfig &config);

/// Report file (report.json or report.csv), timing.json and the plot CSVs
/// under config.output_dir. Returns the paths written.
std::vector<std::filesystem::path> write_outputs(const RunResult &result, const RunConfig &config);

/// The JSON report as printed: two-space indentation and a trailing newline.
std::string report_text(const Report &report);

} // namespace isq
