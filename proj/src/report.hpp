#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace pdp {

inline constexpr const char* kLibraryVersion = "0.1.0";

/// How value, theoretical_value and tolerance decide pass:
///   AbsDiff    |value - theoretical| <= tolerance
///   RelDiff    |value - theoretical| <= tolerance * |theoretical|
///   AtMost     value <= theoretical + tolerance
///   Above      value > tolerance (p-values, separation gaps)
///   Below      value < tolerance
///   Holds      boolean property recorded as value 1 or 0
///   Info       no claim
enum class Relation { AbsDiff, RelDiff, AtMost, Above, Below, Holds, Info };

std::string to_string(Relation r);
Relation relation_from_string(const std::string& s);

struct Row {
  std::string label;
  std::string statistic;
  double value = 0.0;
  std::optional<double> theoretical_value;
  std::optional<double> tolerance;
  Relation relation = Relation::Info;
  bool pass = true;
  std::optional<std::size_t> n;
};

Row claim_abs(std::string label, std::string statistic, double value, double theory, double tol);
Row claim_rel(std::string label, std::string statistic, double value, double theory, double tol);
Row claim_at_most(std::string label, std::string statistic, double value, double bound, double tol);
Row claim_above(std::string label, std::string statistic, double value, double threshold);
Row claim_below(std::string label, std::string statistic, double value, double threshold);
Row claim_holds(std::string label, std::string statistic, bool holds);
Row info(std::string label, std::string statistic, double value,
         std::optional<double> theory = std::nullopt);

struct Suite {
  std::string name;
  double alpha = 0.0;
  double theta = 0.0;
  std::size_t n = 0;
  std::size_t M = 0;
  std::uint64_t seed = 0;
  std::vector<Row> rows;
  bool pass = true;

  Row& add(Row row);
};

struct RunReport {
  std::string experiment;
  nlohmann::json config = nlohmann::json::object();
  std::vector<Suite> suites;
  nlohmann::json samples = nlohmann::json::array();
  bool pure_sampler = false;
  bool pass = true;
  double wall_clock_seconds = 0.0;
  std::string library_version = kLibraryVersion;

  /// pass is the conjunction of suite pass flags (always true for pure samplers).
  void finalize();
};

nlohmann::json to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);

std::string render_json(const RunReport& report);
std::string render_csv(const RunReport& report);
/// Everything except wall-clock time; identical across reruns and worker counts.
std::string render_payload(const RunReport& report);

inline constexpr const char* kCsvHeader =
    "experiment,alpha,theta,n,M,seed,label,statistic_name,value,theoretical_value,tolerance,pass";

}  // namespace pdp
