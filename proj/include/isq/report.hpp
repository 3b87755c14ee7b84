#pragma once

#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "isq/region.hpp"

namespace isq {

enum class CheckStatus { pass, fail, report_only };
std::string to_string(CheckStatus s);

struct CheckRecord {
  std::string name;
  std::string anchor; // the statement being checked
  double observed = 0.0;
  std::optional<double> threshold;
  std::string relation; // "<=", ">=", "<", ">" or empty for report-only values
  CheckStatus status = CheckStatus::report_only;
  std::string note;
};

struct SeriesPoint {
  double x, y;
};

// One labelled curve of a plot file: margin_curve, refinement_trails or
// kernel_ratio_grid.
struct Series {
  std::string group;
  std::string label;
  std::vector<SeriesPoint> points;
};

struct Report {
  nlohmann::json config = nlohmann::json::object();
  std::vector<CheckRecord> records;
  std::deque<Series> series; // add_series references stay valid
  nlohmann::json data = nlohmann::json::object();
  std::map<std::string, double> seconds; // wall time per command, kept out of the JSON

  /// Pass/fail records: observed `relation` threshold.
  void check(const std::string &name, const std::string &anchor, double observed,
             const std::string &relation, double threshold, const std::string &note = {});
  void report(const std::string &name, const std::string &anchor, double observed,
              const std::string &note = {});
  void fail(const std::string &name, const std::string &anchor, const std::string &note);
  Series &add_series(const std::string &group, const std::string &label);

  std::vector<std::string> failures() const;
  std::size_t count(CheckStatus s) const;
};

/// Rounds to 12 significant digits so that reports print identically.
double fixed12(double v);
/// fixed12 as JSON; non-finite values become null.
nlohmann::json json_number(double v);

nlohmann::json to_json(const CheckRecord &r);
/// config, versions, records and data. Timing is not included.
nlohmann::json to_json(const Report &r);
nlohmann::json to_json(const RegionVerdict &v);

/// name, anchor, observed, threshold, relation, status, note.
void write_records_csv(const Report &r, std::ostream &os);

inline const char *plot_groups[] = {"margin_curve", "refinement_trails", "kernel_ratio_grid"};

/// One CSV per plot group with header x,y,series; groups without data get
/// the header only. Throws IoError naming the path on failure.
std::vector<std::filesystem::path> emit_plotdata(const Report &report, const std::filesystem::path &dir);

std::string library_version();

} // namespace isq
