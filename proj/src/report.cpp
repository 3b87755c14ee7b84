#include "isq/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include <Eigen/Core>
#include <boost/version.hpp>

#include "isq/error.hpp"

namespace isq {

namespace {

bool holds(double observed, const std::string &rel, double threshold) {
  if (!std::isfinite(observed)) return false;
  if (rel == "<=") return observed <= threshold;
  if (rel == ">=") return observed >= threshold;
  if (rel == "<") return observed < threshold;
  if (rel == ">") return observed > threshold;
  throw InvalidRange("unknown relation '" + rel + "'");
}

std::string csv_number(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

std::string csv_text(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

} // namespace

std::string to_string(CheckStatus s) {
  switch (s) {
  case CheckStatus::pass: return "pass";
  case CheckStatus::fail: return "fail";
  case CheckStatus::report_only: return "report-only";
  }
  return "?";
}

void Report::check(const std::string &name, const std::string &anchor, double observed,
                   const std::string &relation, double threshold, const std::string &note) {
  records.push_back({name, anchor, observed, threshold, relation,
                     holds(observed, relation, threshold) ? CheckStatus::pass : CheckStatus::fail, note});
}

void Report::report(const std::string &name, const std::string &anchor, double observed, const std::string &note) {
  records.push_back({name, anchor, observed, std::nullopt, "", CheckStatus::report_only, note});
}

void Report::fail(const std::string &name, const std::string &anchor, const std::string &note) {
  records.push_back({name, anchor, std::nan(""), std::nullopt, "", CheckStatus::fail, note});
}

Series &Report::add_series(const std::string &group, const std::string &label) {
  series.push_back({group, label, {}});
  return series.back();
}

std::vector<std::string> Report::failures() const {
  std::vector<std::string> out;
  for (const auto &r : records)
    if (r.status == CheckStatus::fail) out.push_back(r.name);
  return out;
}

std::size_t Report::count(CheckStatus s) const {
  std::size_t n = 0;
  for (const auto &r : records) n += r.status == s;
  return n;
}

double fixed12(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  return std::strtod(buf, nullptr);
}

nlohmann::json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return fixed12(v);
}

nlohmann::json to_json(const CheckRecord &r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["anchor"] = r.anchor;
  j["observed"] = json_number(r.observed);
  j["threshold"] = r.threshold ? json_number(*r.threshold) : nlohmann::json(nullptr);
  j["relation"] = r.relation;
  j["status"] = to_string(r.status);
  j["note"] = r.note;
  return j;
}

std::string library_version() { return "1.0.0"; }

nlohmann::json to_json(const Report &r) {
  nlohmann::json j;
  j["config"] = r.config;
  j["versions"] = {{"isq", library_version()},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"boost", BOOST_LIB_VERSION},
                   {"compiler", __VERSION__}};
  nlohmann::json recs = nlohmann::json::array();
  for (const auto &rec : r.records) recs.push_back(to_json(rec));
  j["records"] = recs;
  j["summary"] = {{"pass", r.count(CheckStatus::pass)},
                  {"fail", r.count(CheckStatus::fail)},
                  {"report_only", r.count(CheckStatus::report_only)}};
  j["data"] = r.data;
  return j;
}

nlohmann::json to_json(const RegionVerdict &v) {
  nlohmann::json j;
  j["q"] = v.query.q.str();
  j["s"] = v.query.s.str();
  j["admissible"] = v.admissible;
  j["condition1"] = to_string(v.condition1);
  j["condition1_holds"] = v.condition1_holds;
  nlohmann::json qs = nlohmann::json::array();
  for (const auto &q : v.quantities) qs.push_back(to_string(q));
  j["condition2_terms"] = qs;
  j["condition2"] = to_string(v.condition2);
  j["condition2_squared_max"] = to_string(v.condition2_signed_square());
  j["condition2_holds"] = v.condition2_holds;
  if (v.certificate.empty) {
    j["certificate_p_interval"] = nullptr;
  } else {
    j["certificate_p_interval"] = {
        {"lower", v.certificate.lower_is_minus_sqrt2 ? std::string("-sqrt(2)") : to_string(v.certificate.lower)},
        {"upper", "sqrt(2)"},
        {"lower_value", json_number(v.certificate.lower_value())},
        {"upper_value", json_number(v.certificate.upper_value())},
        {"open", true}};
  }
  return j;
}

void write_records_csv(const Report &r, std::ostream &os) {
  os << "name,anchor,observed,threshold,relation,status,note\n";
  for (const auto &rec : r.records)
    os << csv_text(rec.name) << ',' << csv_text(rec.anchor) << ',' << csv_number(rec.observed) << ','
       << (rec.threshold ? csv_number(*rec.threshold) : "") << ',' << rec.relation << ',' << to_string(rec.status)
       << ',' << csv_text(rec.note) << '\n';
}

std::vector<std::filesystem::path> emit_plotdata(const Report &report, const std::filesystem::path &dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> out;
  for (const char *group : plot_groups) {
    const auto path = dir / (std::string(group) + ".csv");
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path.string());
    os << "x,y,series\n";
    for (const auto &s : report.series)
      if (s.group == group)
        for (const auto &p : s.points) os << csv_number(p.x) << ',' << csv_number(p.y) << ',' << csv_text(s.label) << '\n';
    if (!os) throw IoError("write failed for " + path.string());
    out.push_back(path);
  }
  return out;
}

} // namespace isq
