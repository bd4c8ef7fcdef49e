#include "report.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "errors.hpp"
#include "format.hpp"

namespace pdp {

using nlohmann::json;

std::string to_string(Relation r) {
  switch (r) {
    case Relation::AbsDiff: return "abs_diff";
    case Relation::RelDiff: return "rel_diff";
    case Relation::AtMost: return "at_most";
    case Relation::Above: return "above";
    case Relation::Below: return "below";
    case Relation::Holds: return "holds";
    case Relation::Info: return "info";
  }
  return "info";
}

Relation relation_from_string(const std::string& s) {
  for (const auto r : {Relation::AbsDiff, Relation::RelDiff, Relation::AtMost, Relation::Above,
                       Relation::Below, Relation::Holds, Relation::Info}) {
    if (to_string(r) == s) return r;
  }
  throw ParameterError("unknown relation '" + s + "'");
}

Row claim_abs(std::string label, std::string statistic, double value, double theory, double tol) {
  return {std::move(label), std::move(statistic), value, theory, tol, Relation::AbsDiff,
          std::abs(value - theory) <= tol, std::nullopt};
}

Row claim_rel(std::string label, std::string statistic, double value, double theory, double tol) {
  return {std::move(label), std::move(statistic), value, theory, tol, Relation::RelDiff,
          std::abs(value - theory) <= tol * std::abs(theory), std::nullopt};
}

Row claim_at_most(std::string label, std::string statistic, double value, double bound, double tol) {
  return {std::move(label), std::move(statistic), value, bound, tol, Relation::AtMost,
          value <= bound + tol, std::nullopt};
}

Row claim_above(std::string label, std::string statistic, double value, double threshold) {
  return {std::move(label), std::move(statistic), value, std::nullopt, threshold, Relation::Above,
          value > threshold, std::nullopt};
}

Row claim_below(std::string label, std::string statistic, double value, double threshold) {
  return {std::move(label), std::move(statistic), value, std::nullopt, threshold, Relation::Below,
          value < threshold, std::nullopt};
}

Row claim_holds(std::string label, std::string statistic, bool holds) {
  return {std::move(label), std::move(statistic), holds ? 1.0 : 0.0, 1.0, 0.0, Relation::Holds,
          holds, std::nullopt};
}

Row info(std::string label, std::string statistic, double value, std::optional<double> theory) {
  return {std::move(label), std::move(statistic), value, theory, std::nullopt, Relation::Info,
          true, std::nullopt};
}

Row& Suite::add(Row row) {
  pass = pass && row.pass;
  rows.push_back(std::move(row));
  return rows.back();
}

void RunReport::finalize() {
  pass = true;
  if (pure_sampler) return;
  for (const auto& s : suites) pass = pass && s.pass;
}

namespace {

json number_or_null(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

json optional_number(const std::optional<double>& x) {
  if (!x) return nullptr;
  return number_or_null(*x);
}

double read_number(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

std::optional<double> read_optional(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_number(const std::optional<double>& x) {
  if (!x || !std::isfinite(*x)) return "";
  return format_number(*x);
}

json suites_json(const RunReport& r) {
  json suites = json::array();
  for (const auto& s : r.suites) {
    json rows = json::array();
    for (const auto& row : s.rows) {
      json jr = {{"label", row.label},
                 {"statistic", row.statistic},
                 {"value", number_or_null(row.value)},
                 {"theoretical_value", optional_number(row.theoretical_value)},
                 {"tolerance", optional_number(row.tolerance)},
                 {"relation", to_string(row.relation)},
                 {"pass", row.pass}};
      if (row.n) jr["n"] = *row.n;
      rows.push_back(std::move(jr));
    }
    suites.push_back({{"name", s.name},
                      {"alpha", s.alpha},
                      {"theta", s.theta},
                      {"n", s.n},
                      {"M", s.M},
                      {"seed", s.seed},
                      {"rows", std::move(rows)},
                      {"pass", s.pass}});
  }
  return suites;
}

}  // namespace

json to_json(const RunReport& r) {
  return {{"experiment", r.experiment},
          {"config", r.config},
          {"suites", suites_json(r)},
          {"samples", r.samples},
          {"pure_sampler", r.pure_sampler},
          {"pass", r.pass},
          {"wall_clock_seconds", r.wall_clock_seconds},
          {"library_version", r.library_version}};
}

RunReport report_from_json(const json& j) {
  try {
    RunReport r;
    r.experiment = j.at("experiment").get<std::string>();
    r.config = j.at("config");
    r.samples = j.value("samples", json::array());
    r.pure_sampler = j.value("pure_sampler", false);
    r.pass = j.at("pass").get<bool>();
    r.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    r.library_version = j.at("library_version").get<std::string>();
    for (const auto& js : j.at("suites")) {
      Suite s;
      s.name = js.at("name").get<std::string>();
      s.alpha = js.at("alpha").get<double>();
      s.theta = js.at("theta").get<double>();
      s.n = js.at("n").get<std::size_t>();
      s.M = js.at("M").get<std::size_t>();
      s.seed = js.at("seed").get<std::uint64_t>();
      s.pass = js.at("pass").get<bool>();
      for (const auto& jr : js.at("rows")) {
        Row row;
        row.label = jr.at("label").get<std::string>();
        row.statistic = jr.at("statistic").get<std::string>();
        row.value = read_number(jr.at("value"));
        row.theoretical_value = read_optional(jr.at("theoretical_value"));
        row.tolerance = read_optional(jr.at("tolerance"));
        row.relation = relation_from_string(jr.value("relation", std::string("info")));
        row.pass = jr.at("pass").get<bool>();
        if (jr.contains("n")) row.n = jr.at("n").get<std::size_t>();
        s.rows.push_back(std::move(row));
      }
      r.suites.push_back(std::move(s));
    }
    return r;
  } catch (const json::exception& e) {
    throw ParameterError(std::string("malformed report: ") + e.what());
  }
}

std::string render_json(const RunReport& report) { return to_json(report).dump(2) + "\n"; }

std::string render_payload(const RunReport& report) {
  const json j = {{"experiment", report.experiment},
                  {"suites", suites_json(report)},
                  {"samples", report.samples},
                  {"pass", report.pass}};
  return j.dump();
}

std::string render_csv(const RunReport& report) {
  std::ostringstream out;
  out << kCsvHeader << "\n";
  for (const auto& s : report.suites) {
    for (const auto& row : s.rows) {
      out << csv_field(report.experiment) << ',' << format_number(s.alpha) << ','
          << format_number(s.theta) << ',' << (row.n ? *row.n : s.n) << ',' << s.M << ','
          << s.seed << ',' << csv_field(row.label) << ',' << csv_field(row.statistic) << ','
          << csv_number(row.value) << ',' << csv_number(row.theoretical_value) << ','
          << csv_number(row.tolerance) << ',' << (row.pass ? "true" : "false") << "\n";
    }
  }
  return out.str();
}

}  // namespace pdp
