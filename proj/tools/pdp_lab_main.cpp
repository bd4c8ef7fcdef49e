#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdplab/pdp_lab.h"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitResource = 3;

int exit_code_for(pdp_status s) {
  switch (s) {
    case PDP_OK:
      return kExitPass;
    case PDP_ERR_PARAMETER:
    case PDP_ERR_DOMAIN:
    case PDP_ERR_SHAPE:
    case PDP_ERR_USAGE:
    case PDP_ERR_NULL_ARGUMENT:
      return kExitUsage;
    default:
      return kExitResource;
  }
}

int fail(pdp_status s) {
  std::cerr << "pdp-lab: " << pdp_status_name(s) << ": " << pdp_last_error() << "\n";
  return exit_code_for(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pitman-Yor process simulation and verification runs"};
  app.set_version_flag("--version", std::string(pdp_version()));

  std::string experiment;
  std::string config_path;
  std::optional<double> alpha, theta, eps, kappa;
  std::optional<std::uint64_t> n, replicates, seed;
  std::optional<unsigned> workers;
  std::optional<std::string> out, format, route;

  app.add_option("experiment", experiment,
                 "sample | urn | posterior | verify-moments | verify-identity | verify-clt-pd | "
                 "verify-clt-dirichlet | verify-bvm | consistency | concentration")
      ->required();
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--alpha", alpha, "discount parameter (also sets the alpha grid)");
  app.add_option("--theta", theta, "concentration parameter (also sets the theta grid)");
  app.add_option("--kappa", kappa, "per-component mass for verify-clt-dirichlet");
  app.add_option("--n", n, "sample size");
  app.add_option("--replicates", replicates, "Monte Carlo replicates M");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--eps", eps, "tail-mass truncation threshold");
  app.add_option("--route", route, "direct | composition | both");
  app.add_option("--out", out, "report path (default: stdout)");
  app.add_option("--format", format, "json | csv");
  app.add_option("--workers", workers, "worker threads (0 = machine parallelism)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  std::string config_text;
  if (!config_path.empty()) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
      std::cerr << "pdp-lab: I/O error: cannot read config '" << config_path << "'\n";
      return kExitResource;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    config_text = buf.str();
  }

  nlohmann::json overrides = nlohmann::json::object();
  if (alpha) {
    overrides["alpha"] = *alpha;
    overrides["alphas"] = {*alpha};
  }
  if (theta) {
    overrides["theta"] = *theta;
    overrides["thetas"] = {*theta};
  }
  if (kappa) overrides["kappas"] = {*kappa};
  if (n) overrides["n"] = *n;
  if (replicates) overrides["replicates"] = *replicates;
  if (seed) overrides["seed"] = *seed;
  if (eps) overrides["truncation"] = {{"kind", "tail_mass"}, {"eps", *eps}};
  if (route) overrides["route"] = *route;
  if (out) overrides["out"] = *out;
  if (format) overrides["format"] = *format;
  if (workers) overrides["workers"] = *workers;
  const std::string overrides_text = overrides.dump();

  pdp_report* report = nullptr;
  const pdp_status s = pdp_run_experiment(experiment.c_str(), config_text.c_str(),
                                          overrides_text.c_str(), &report);
  if (s != PDP_OK) return fail(s);

  const std::string path = pdp_report_output_path(report);
  const std::string fmt = pdp_report_output_format(report);
  pdp_status ws;
  if (path.empty()) {
    char* text = nullptr;
    ws = pdp_report_render(report, fmt.c_str(), &text);
    if (ws == PDP_OK) {
      std::fputs(text, stdout);
      std::fflush(stdout);
      pdp_string_free(text);
    }
  } else {
    ws = pdp_report_write(report, fmt.c_str(), path.c_str());
  }
  const bool pass = pdp_report_pass(report) != 0;
  pdp_report_destroy(report);
  if (ws != PDP_OK) return fail(ws);
  std::cerr << "pdp-lab " << experiment << ": " << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? kExitPass : kExitFail;
}
