#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "asymptotics.hpp"
#include "measures.hpp"
#include "py_sampler.hpp"
#include "report.hpp"

namespace pdp {

const std::vector<std::string>& experiment_names();

struct ExperimentConfig {
  std::string experiment;
  double alpha = 0.5;
  double theta = 1.0;
  std::vector<double> alphas;
  std::vector<double> thetas;
  std::vector<double> kappas;
  BaseMeasure base = BaseMeasure::uniform01();
  BaseMeasure truth = BaseMeasure::uniform01();
  BaseMeasure discrete_truth = BaseMeasure::uniform01();
  std::size_t n = 0;
  std::size_t replicates = 0;
  std::vector<std::size_t> n_list;
  std::vector<std::size_t> n_p_list;
  double dirichlet_theta = 2000.0;
  CellPartition partition = CellPartition::deciles();
  std::vector<FunctionSpec> functions;
  TruncationPolicy truncation;
  std::string route = "direct";
  bool single_atom_probe = false;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  Thresholds thresholds;
  std::string out;
  std::string format = "json";

  /// Fully resolved settings, echoed into the report.
  nlohmann::json resolved;
};

/// Built-in settings for an experiment before any file or flag is applied.
nlohmann::json default_config(const std::string& experiment);

/// defaults <- file <- overrides, then validation. Throws UsageError naming
/// the offending key or constraint.
ExperimentConfig resolve_config(const std::string& experiment, const nlohmann::json& file,
                                const nlohmann::json& overrides);

RunReport run_experiment(const ExperimentConfig& config);

/// Writes json or csv to path; throws IoError when the file cannot be written.
void write_report(const RunReport& report, const std::string& format, const std::string& path);
std::string render(const RunReport& report, const std::string& format);

}  // namespace pdp
