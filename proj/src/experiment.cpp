#include "experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>

#include "errors.hpp"
#include "format.hpp"
#include "parallel.hpp"
#include "posterior.hpp"
#include "urn.hpp"

namespace pdp {

using nlohmann::json;

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "sample",        "urn",        "posterior",         "verify-moments",
      "verify-identity", "verify-clt-pd", "verify-clt-dirichlet", "verify-bvm",
      "consistency",   "concentration"};
  return names;
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

const std::set<std::string> kKeys = {
    "experiment", "alpha",      "theta",           "alphas",    "thetas",
    "kappas",     "base",       "truth",           "discrete_truth", "n",
    "replicates", "n_list",     "n_p_list",        "dirichlet_theta", "partition",
    "functions",  "truncation", "route",           "single_atom_probe", "seed",
    "workers",    "thresholds", "out",             "format"};

const std::set<std::string> kTruncationKeys = {"kind", "eps", "k", "residual", "stick_budget"};
const std::set<std::string> kThresholdKeys = {
    "p_min",         "cov_tol",         "var_tol",       "se_multiplier", "bound_se_multiplier",
    "consistency_tol", "discrete_tol", "inconsistency_gap"};

json family4() {
  return json::array({{{"indicator", {0.0, 0.25}}},
                      {{"indicator", {0.0, 0.5}}},
                      {{"indicator", {0.0, 0.75}}},
                      {{"polynomial", {{"coefficients", {0.0, 0.0, 1.0}}, {"domain", {0.0, 1.0}}}}}});
}

json truncation_json(std::size_t budget) {
  return {{"kind", "tail_mass"}, {"eps", 1e-8}, {"residual", "moment_matched"},
          {"stick_budget", budget}};
}

json decile_points() { return json::array({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}); }

json thresholds_json() {
  const Thresholds t;
  return {{"p_min", t.p_min},
          {"cov_tol", t.cov_tol},
          {"var_tol", t.var_tol},
          {"se_multiplier", t.se_multiplier},
          {"bound_se_multiplier", t.bound_se_multiplier},
          {"consistency_tol", t.consistency_tol},
          {"discrete_tol", t.discrete_tol},
          {"inconsistency_gap", t.inconsistency_gap}};
}

[[noreturn]] void usage(const std::string& msg) { throw UsageError(msg); }

double get_number(const json& j, const std::string& key) {
  if (!j.is_number()) usage("config key '" + key + "' must be a number");
  return j.get<double>();
}

std::size_t get_count(const json& j, const std::string& key) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    usage("config key '" + key + "' must be a nonnegative integer");
  }
  return j.get<std::size_t>();
}

std::vector<double> get_numbers(const json& j, const std::string& key) {
  if (!j.is_array()) usage("config key '" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(get_number(x, key));
  return out;
}

std::vector<std::size_t> get_counts(const json& j, const std::string& key) {
  if (!j.is_array()) usage("config key '" + key + "' must be an array of integers");
  std::vector<std::size_t> out;
  for (const auto& x : j) out.push_back(get_count(x, key));
  return out;
}

BaseMeasure parse_base(const json& j, const std::string& key) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "uniform01") return BaseMeasure::uniform01();
    if (s == "std_normal") return BaseMeasure::std_normal();
    usage("config key '" + key + "': unknown measure '" + s + "'");
  }
  if (j.is_object() && j.size() == 1 && j.contains("finite_support")) {
    const auto& fs = j.at("finite_support");
    if (!fs.is_object() || !fs.contains("points") || !fs.contains("probs")) {
      usage("config key '" + key + "': finite_support needs points and probs");
    }
    try {
      return BaseMeasure::finite_support(get_numbers(fs.at("points"), key),
                                         get_numbers(fs.at("probs"), key));
    } catch (const UsageError&) {
      throw;
    } catch (const Error& e) {
      usage("config key '" + key + "': " + e.what());
    }
  }
  usage("config key '" + key + "' must be \"uniform01\", \"std_normal\" or {\"finite_support\": ...}");
}

FunctionSpec parse_function(const json& j) {
  if (!j.is_object() || j.size() != 1) usage("each entry of 'functions' must be a one-key object");
  const auto& [kind, v] = *j.items().begin();
  try {
    if (kind == "indicator") {
      const auto ab = get_numbers(v, "functions.indicator");
      if (ab.size() != 2) usage("indicator needs [a, b]");
      return FunctionSpec::indicator(ab[0], ab[1]);
    }
    if (kind == "polynomial") {
      if (!v.is_object() || !v.contains("coefficients") || !v.contains("domain")) {
        usage("polynomial needs coefficients and domain");
      }
      const auto dom = get_numbers(v.at("domain"), "functions.polynomial.domain");
      if (dom.size() != 2) usage("polynomial domain needs [lo, hi]");
      return FunctionSpec::polynomial(get_numbers(v.at("coefficients"), "functions.polynomial"),
                                      dom[0], dom[1]);
    }
    if (kind == "constant") return FunctionSpec::constant(get_number(v, "functions.constant"));
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    usage(std::string("config key 'functions': ") + e.what());
  }
  usage("unknown function kind '" + kind + "'");
}

TruncationPolicy parse_truncation(const json& j) {
  if (!j.is_object()) usage("config key 'truncation' must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!kTruncationKeys.count(k)) usage("unknown truncation key '" + k + "'");
  }
  TruncationPolicy t;
  const std::string kind = j.value("kind", std::string("tail_mass"));
  if (kind == "tail_mass") {
    t.kind = TruncationPolicy::Kind::TailMass;
  } else if (kind == "fixed_k") {
    t.kind = TruncationPolicy::Kind::FixedK;
    if (!j.contains("k")) usage("fixed_k truncation needs 'k'");
    t.sticks = get_count(j.at("k"), "truncation.k");
  } else {
    usage("truncation kind must be tail_mass or fixed_k");
  }
  if (j.contains("eps")) t.eps = get_number(j.at("eps"), "truncation.eps");
  if (j.contains("stick_budget")) t.stick_budget = get_count(j.at("stick_budget"), "truncation.stick_budget");
  const std::string residual = j.value("residual", std::string("moment_matched"));
  if (residual == "moment_matched") {
    t.residual = ResidualRule::MomentMatched;
  } else if (residual == "single_atom") {
    t.residual = ResidualRule::SingleAtom;
  } else {
    usage("truncation residual must be moment_matched or single_atom");
  }
  try {
    t.validate();
  } catch (const Error& e) {
    usage(std::string("config key 'truncation': ") + e.what());
  }
  return t;
}

Thresholds parse_thresholds(const json& j) {
  if (!j.is_object()) usage("config key 'thresholds' must be an object");
  Thresholds t;
  for (const auto& [k, v] : j.items()) {
    if (!kThresholdKeys.count(k)) usage("unknown threshold key '" + k + "'");
    const double x = get_number(v, "thresholds." + k);
    if (!(x >= 0.0)) usage("threshold '" + k + "' must be nonnegative");
    if (k == "p_min") t.p_min = x;
    if (k == "cov_tol") t.cov_tol = x;
    if (k == "var_tol") t.var_tol = x;
    if (k == "se_multiplier") t.se_multiplier = x;
    if (k == "bound_se_multiplier") t.bound_se_multiplier = x;
    if (k == "consistency_tol") t.consistency_tol = x;
    if (k == "discrete_tol") t.discrete_tol = x;
    if (k == "inconsistency_gap") t.inconsistency_gap = x;
  }
  return t;
}

void check_params(double alpha, double theta) {
  if (!(alpha >= 0.0 && alpha < 1.0)) usage("alpha must satisfy 0 <= alpha < 1, got " + format_number(alpha));
  if (!(theta > -alpha)) {
    usage("theta must satisfy theta > -alpha, got theta=" + format_number(theta) +
          " alpha=" + format_number(alpha));
  }
}

json merge_into(json base, const json& layer) {
  for (const auto& [k, v] : layer.items()) {
    if ((k == "truncation" || k == "thresholds") && v.is_object() && base.contains(k) &&
        base[k].is_object()) {
      for (const auto& [kk, vv] : v.items()) base[k][kk] = vv;
      // A switch to fixed_k makes the tail-mass budget meaningless and vice versa.
      if (k == "truncation" && v.contains("kind")) {
        if (v["kind"] == "fixed_k") base[k].erase("eps");
        if (v["kind"] == "tail_mass") base[k].erase("k");
      }
    } else {
      base[k] = v;
    }
  }
  return base;
}

}  // namespace

json default_config(const std::string& e) {
  json j = {{"experiment", e},
            {"base", "uniform01"},
            {"partition", decile_points()},
            {"functions", family4()},
            {"seed", 1},
            {"workers", 0},
            {"thresholds", thresholds_json()},
            {"out", ""},
            {"format", "json"}};
  const json grid_alphas = {0.0, 0.25, 0.5, 0.75};
  const json grid_thetas = {0.5, 1.0, 5.0};
  if (e == "sample") {
    j.update({{"alpha", 0.5}, {"theta", 1.0}, {"replicates", 1}, {"truncation", truncation_json(65536)}});
  } else if (e == "urn") {
    j.update({{"alpha", 0.5}, {"theta", 1.0}, {"n", 100}, {"replicates", 1}});
  } else if (e == "posterior") {
    j.update({{"alpha", 0.5}, {"theta", 1.0}, {"n", 100}, {"replicates", 1}, {"truth", "uniform01"},
              {"truncation", truncation_json(65536)}});
  } else if (e == "verify-moments") {
    j.update({{"alphas", grid_alphas}, {"thetas", grid_thetas}, {"replicates", 20000},
              {"truncation", truncation_json(1024)}, {"single_atom_probe", true}});
  } else if (e == "verify-identity") {
    j.update({{"alphas", {0.25, 0.5, 0.75}}, {"thetas", {1.0}}, {"n", 10}, {"replicates", 10000},
              {"truncation", truncation_json(1024)}});
  } else if (e == "verify-clt-pd") {
    j.update({{"alphas", {0.25, 0.5, 0.75}}, {"thetas", {1.0}}, {"n", 2000}, {"replicates", 5000},
              {"route", "direct"}, {"truncation", truncation_json(32768)}});
  } else if (e == "verify-clt-dirichlet") {
    j.update({{"kappas", {0.5, 1.0, 2.0}}, {"dirichlet_theta", 2000.0}, {"replicates", 5000},
              {"route", "composition"}, {"truncation", truncation_json(65536)}});
  } else if (e == "verify-bvm") {
    j.update({{"alphas", {0.0, 0.5}}, {"thetas", {1.0}}, {"n", 2000}, {"replicates", 5000},
              {"truth", "uniform01"}, {"truncation", truncation_json(32768)}});
  } else if (e == "consistency") {
    j.update({{"alpha", 0.5}, {"theta", 1.0}, {"base", "std_normal"}, {"truth", "uniform01"},
              {"n_list", {100, 1000, 10000}}, {"alphas", grid_alphas}, {"thetas", grid_thetas},
              {"discrete_truth",
               {{"finite_support",
                 {{"points", decile_points()},
                  {"probs", json::array({1.0 / 9, 1.0 / 9, 1.0 / 9, 1.0 / 9, 1.0 / 9, 1.0 / 9,
                                         1.0 / 9, 1.0 / 9, 1.0 / 9})}}}}},
              {"n_p_list", {10, 100, 1000}}, {"replicates", 2000},
              {"truncation", truncation_json(1024)}});
  } else if (e == "concentration") {
    j.update({{"alphas", grid_alphas}, {"thetas", grid_thetas}, {"n_list", {10, 100, 1000}},
              {"replicates", 2000}, {"truth", "uniform01"}, {"truncation", truncation_json(1024)}});
  } else {
    usage("unknown experiment '" + e + "'");
  }
  return j;
}

ExperimentConfig resolve_config(const std::string& experiment, const json& file,
                                const json& overrides) {
  for (const json* layer : {&file, &overrides}) {
    if (!layer->is_null() && !layer->is_object()) usage("config must be a JSON object");
    if (layer->is_object()) {
      for (const auto& [k, v] : layer->items()) {
        if (!kKeys.count(k)) usage("unknown config key '" + k + "'");
      }
    }
  }
  if (file.is_object() && file.contains("experiment") && file.at("experiment") != experiment) {
    usage("config file is for experiment '" + file.at("experiment").dump() +
          "' but '" + experiment + "' was requested");
  }
  json r = default_config(experiment);
  if (file.is_object()) r = merge_into(r, file);
  if (overrides.is_object()) r = merge_into(r, overrides);

  ExperimentConfig c;
  c.experiment = experiment;
  if (r.contains("alpha")) c.alpha = get_number(r["alpha"], "alpha");
  if (r.contains("theta")) c.theta = get_number(r["theta"], "theta");
  if (r.contains("alphas")) c.alphas = get_numbers(r["alphas"], "alphas");
  if (r.contains("thetas")) c.thetas = get_numbers(r["thetas"], "thetas");
  if (r.contains("kappas")) c.kappas = get_numbers(r["kappas"], "kappas");
  c.base = parse_base(r["base"], "base");
  c.truth = r.contains("truth") ? parse_base(r["truth"], "truth") : c.base;
  if (r.contains("discrete_truth")) c.discrete_truth = parse_base(r["discrete_truth"], "discrete_truth");
  if (r.contains("n")) c.n = get_count(r["n"], "n");
  if (r.contains("replicates")) c.replicates = get_count(r["replicates"], "replicates");
  if (r.contains("n_list")) c.n_list = get_counts(r["n_list"], "n_list");
  if (r.contains("n_p_list")) c.n_p_list = get_counts(r["n_p_list"], "n_p_list");
  if (r.contains("dirichlet_theta")) c.dirichlet_theta = get_number(r["dirichlet_theta"], "dirichlet_theta");
  try {
    c.partition = CellPartition(get_numbers(r["partition"], "partition"));
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    usage(std::string("config key 'partition': ") + e.what());
  }
  if (!r["functions"].is_array() || r["functions"].empty()) usage("'functions' must be a nonempty array");
  for (const auto& f : r["functions"]) c.functions.push_back(parse_function(f));
  if (r.contains("truncation")) c.truncation = parse_truncation(r["truncation"]);
  if (r.contains("route")) {
    if (!r["route"].is_string()) usage("config key 'route' must be a string");
    c.route = r["route"].get<std::string>();
    if (c.route != "direct" && c.route != "composition" && c.route != "both") {
      usage("route must be direct, composition or both");
    }
  }
  if (r.contains("single_atom_probe")) {
    if (!r["single_atom_probe"].is_boolean()) usage("config key 'single_atom_probe' must be a boolean");
    c.single_atom_probe = r["single_atom_probe"].get<bool>();
  }
  if (!r["seed"].is_number_unsigned() && !(r["seed"].is_number_integer() && r["seed"].get<long long>() >= 0)) {
    usage("config key 'seed' must be a nonnegative integer");
  }
  c.seed = r["seed"].get<std::uint64_t>();
  c.workers = static_cast<unsigned>(get_count(r["workers"], "workers"));
  c.thresholds = parse_thresholds(r["thresholds"]);
  if (!r["out"].is_string()) usage("config key 'out' must be a string");
  c.out = r["out"].get<std::string>();
  if (!r["format"].is_string()) usage("config key 'format' must be a string");
  c.format = r["format"].get<std::string>();
  if (c.format != "json" && c.format != "csv") usage("format must be json or csv");

  // Experiment-specific constraints.
  const auto& e = experiment;
  const bool single = e == "sample" || e == "urn" || e == "posterior" || e == "consistency";
  if (single) check_params(c.alpha, c.theta);
  if (e != "sample" && e != "urn" && e != "posterior" && e != "verify-clt-dirichlet") {
    if (c.alphas.empty() || c.thetas.empty()) usage("'alphas' and 'thetas' must be nonempty");
    for (const double a : c.alphas)
      for (const double t : c.thetas) check_params(a, t);
  }
  if (c.base.is_atomic()) usage("'base' must be a non-atomic measure (uniform01 or std_normal)");
  if (e == "sample" || e == "urn" || e == "posterior") {
    if (c.replicates < 1) usage("'replicates' must be at least 1");
  }
  if ((e == "urn" || e == "posterior") && c.n < 1) usage("'n' must be at least 1");
  if (e == "verify-moments" || e == "verify-identity" || e == "verify-clt-pd" || e == "verify-bvm" ||
      e == "verify-clt-dirichlet") {
    if (c.replicates < 2) usage("'replicates' must be at least 2");
  }
  if (e == "verify-identity" || e == "verify-clt-pd") {
    if (c.n < 1) usage("'n' must be at least 1");
    for (const double a : c.alphas)
      if (!(a > 0.0)) usage("alpha must satisfy 0 < alpha < 1 for " + e);
    for (const double t : c.thetas)
      if (!(t > 0.0)) usage("theta must be positive for " + e);
  }
  if (e == "verify-bvm" && c.n < 1) usage("'n' must be at least 1");
  if (e == "verify-clt-dirichlet") {
    if (c.kappas.empty()) usage("'kappas' must be nonempty");
    if (!(c.dirichlet_theta > 0.0)) usage("'dirichlet_theta' must be positive");
    for (const double k : c.kappas) {
      if (!(k > 0.0)) usage("kappa must be positive");
      const double n = c.dirichlet_theta / k;
      if (std::abs(n - std::round(n)) > 1e-9 * n || std::round(n) < 1.0) {
        usage("dirichlet_theta / kappa must be a positive integer, got " + format_number(n));
      }
    }
  }
  if (e == "consistency") {
    if (c.n_list.empty()) usage("'n_list' must be nonempty");
    for (const auto n : c.n_list)
      if (n < 1) usage("'n_list' entries must be positive");
    if (!c.discrete_truth.is_atomic()) usage("'discrete_truth' must be a finite_support measure");
    if (c.replicates < 2) usage("'replicates' must be at least 2");
  }
  if (e == "concentration") {
    if (c.n_list.empty()) usage("'n_list' must be nonempty");
    for (const auto n : c.n_list)
      if (n < 1) usage("'n_list' entries must be positive");
    if (c.replicates < 100) usage("'replicates' must be at least 100 for concentration");
  }
  c.resolved = r;
  return c;
}

// ---------------------------------------------------------------------------
// Runs

namespace {

struct Moments {
  double mean;
  double variance;
  double se_mean;
  double se_variance;
};

Moments moments(const std::vector<double>& x) {
  const double m = static_cast<double>(x.size());
  double s = 0.0;
  for (const double v : x) s += v;
  const double mean = s / m;
  double s2 = 0.0;
  double s4 = 0.0;
  for (const double v : x) {
    const double d = (v - mean) * (v - mean);
    s2 += d;
    s4 += d * d;
  }
  const double var = s2 / (m - 1.0);
  const double m4 = s4 / m;
  const double var_of_var = std::max(m4 - var * var, 0.0) / m;
  return {mean, var, std::sqrt(var / m), std::sqrt(var_of_var)};
}

std::string params_tag(double alpha, double theta) {
  return "alpha=" + format_number(alpha) + ",theta=" + format_number(theta);
}

Suite make_suite(const std::string& name, double alpha, double theta, std::size_t n, std::size_t m,
                 std::uint64_t master) {
  Suite s;
  s.name = name;
  s.alpha = alpha;
  s.theta = theta;
  s.n = n;
  s.M = m;
  s.seed = derive_seed(master, name);
  return s;
}

void add_truncation_rows(Suite& s, const TruncationStats& st) {
  if (st.samples == 0) return;
  const double m = static_cast<double>(st.samples);
  s.add(info("truncation", "mean_sticks", static_cast<double>(st.sticks) / m));
  s.add(info("truncation", "mean_residual_atoms", static_cast<double>(st.residual_atoms) / m));
  s.add(info("truncation", "mean_residual_mass", st.residual_mass / m));
  s.add(info("truncation", "max_residual_mass", st.max_residual_mass));
  s.add(info("truncation", "budget_stop_fraction", static_cast<double>(st.budget_stops) / m));
}

json atoms_json(const AtomicMeasure& p) {
  json a = json::array();
  for (const auto& x : p.atoms()) a.push_back({x.location, x.weight});
  return a;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

// Rows P(f) for prior samples, with the max |total weight - 1| on the side.
struct PriorDraws {
  ReplicateSet values;
  double max_normalization_error;
  TruncationStats stats;
};

template <class Sampler>
PriorDraws prior_draws(const std::vector<FunctionSpec>& functions, std::size_t m,
                       ReplicateMeta meta, unsigned workers, Sampler&& sampler) {
  std::vector<double> norm(m);
  std::vector<TruncationStats> per(m);
  auto reps = generate_replicates(functions, m, std::move(meta), workers,
                                  [&](RandomStream& stream, std::span<double> row, std::size_t i) {
                                    const auto p = sampler(stream, &per[i]);
                                    norm[i] = std::abs(p.total_weight() - 1.0);
                                    integrate_all(p, functions, row);
                                  });
  TruncationStats stats;
  for (const auto& s : per) stats.merge(s);
  return {std::move(reps), *std::max_element(norm.begin(), norm.end()), stats};
}

// ----- pure samplers

void run_sample(const ExperimentConfig& c, RunReport& r) {
  r.pure_sampler = true;
  const PYParams params{c.alpha, c.theta};
  Suite s = make_suite("sample(" + params_tag(c.alpha, c.theta) + ")", c.alpha, c.theta, 0,
                       c.replicates, c.seed);
  TruncationStats stats;
  double max_err = 0.0;
  for (std::size_t i = 0; i < c.replicates; ++i) {
    RandomStream stream({s.seed, i});
    TruncationStats one;
    const auto p = stick_breaking_sample(params, c.base, c.truncation, stream, &one);
    stats.merge(one);
    max_err = std::max(max_err, std::abs(p.total_weight() - 1.0));
    r.samples.push_back({{"replicate", i},
                         {"sticks", one.sticks},
                         {"residual_mass", one.residual_mass},
                         {"atoms", atoms_json(p)}});
  }
  s.add(claim_at_most("weights", "max_total_weight_error", max_err, 0.0, 1e-9));
  add_truncation_rows(s, stats);
  r.suites.push_back(std::move(s));
}

void run_urn(const ExperimentConfig& c, RunReport& r) {
  r.pure_sampler = true;
  const PYParams params{c.alpha, c.theta};
  Suite s = make_suite("urn(" + params_tag(c.alpha, c.theta) + ")", c.alpha, c.theta, c.n,
                       c.replicates, c.seed);
  for (std::size_t i = 0; i < c.replicates; ++i) {
    RandomStream stream({s.seed, i});
    const auto seq = urn_sequence(params, c.base, c.n, stream);
    json blocks = json::array();
    std::size_t total = 0;
    for (const auto& b : seq.summary.blocks) {
      blocks.push_back({b.location, b.count});
      total += b.count;
    }
    s.add(claim_holds("replicate " + std::to_string(i), "counts_sum_to_n", total == c.n));
    s.add(info("replicate " + std::to_string(i), "n_distinct",
               static_cast<double>(seq.summary.distinct())));
    r.samples.push_back({{"replicate", i},
                         {"values", seq.values},
                         {"blocks", blocks},
                         {"ftilde", atoms_json(ftilde(seq.summary, c.alpha))}});
  }
  r.suites.push_back(std::move(s));
}

void run_posterior(const ExperimentConfig& c, RunReport& r) {
  r.pure_sampler = true;
  const PYParams params{c.alpha, c.theta};
  Suite s = make_suite("posterior(" + params_tag(c.alpha, c.theta) + ")", c.alpha, c.theta, c.n,
                       c.replicates, c.seed);
  RandomStream data_stream({derive_seed(c.seed, "data"), 0});
  std::vector<double> data(c.n);
  for (double& x : data) x = c.truth.sample(data_stream);
  const auto summary = summarize(data);
  const auto mean = posterior_mean(summary, params, c.base, c.partition);
  TruncationStats stats;
  json draws = json::array();
  for (std::size_t i = 0; i < c.replicates; ++i) {
    RandomStream stream({s.seed, i});
    const auto d = posterior_sample(summary, params, c.base, c.truncation, stream, &stats);
    draws.push_back({{"replicate", i},
                     {"r", d.r},
                     {"dn", atoms_json(d.dn)},
                     {"continuous_atoms", d.continuous_part.size()},
                     {"cells", cell_probs(d.combined, c.partition)}});
  }
  s.add(info("data", "n_distinct", static_cast<double>(summary.distinct())));
  add_truncation_rows(s, stats);
  r.samples.push_back({{"data", data}, {"posterior_mean_cells", mean}, {"draws", draws}});
  r.suites.push_back(std::move(s));
}

// ----- verification suites

void run_moments(const ExperimentConfig& c, RunReport& r) {
  const auto& fs = c.functions;
  const double k = c.thresholds.se_multiplier;
  for (const double alpha : c.alphas) {
    for (const double theta : c.thetas) {
      const PYParams params{alpha, theta};
      Suite s = make_suite("moments(" + params_tag(alpha, theta) + ")", alpha, theta, 0,
                           c.replicates, c.seed);
      auto draws = prior_draws(fs, c.replicates, {"prior", alpha, theta, 0, s.seed}, c.workers,
                               [&](RandomStream& st, TruncationStats* ts) {
                                 return stick_breaking_sample(params, c.base, c.truncation, st, ts);
                               });
      for (std::size_t i = 0; i < fs.size(); ++i) {
        const auto m = moments(draws.values.column(i));
        s.add(claim_abs(fs[i].label(), "mean", m.mean, integrate(c.base, fs[i]), k * m.se_mean));
      }
      for (std::size_t i = 0; i < fs.size(); ++i) {
        for (std::size_t j = i; j < fs.size(); ++j) {
          std::vector<double> prod(c.replicates);
          for (std::size_t m = 0; m < c.replicates; ++m) {
            prod[m] = draws.values.at(m, i) * draws.values.at(m, j);
          }
          const auto m = moments(prod);
          s.add(claim_abs(fs[i].label() + "*" + fs[j].label(), "product_moment", m.mean,
                          moment_product(params, c.base, fs[i], fs[j]), k * m.se_mean));
        }
      }
      s.add(claim_at_most("weights", "max_total_weight_error", draws.max_normalization_error, 0.0, 1e-9));
      add_truncation_rows(s, draws.stats);
      if (c.single_atom_probe) {
        TruncationPolicy literal = c.truncation;
        literal.kind = TruncationPolicy::Kind::TailMass;
        literal.residual = ResidualRule::SingleAtom;
        RandomStream stream({derive_seed(s.seed, "single_atom_probe"), 0});
        TruncationStats ts;
        bool within_cap = true;
        try {
          stick_breaking_sample(params, c.base, literal, stream, &ts);
        } catch (const ResourceError&) {
          within_cap = false;
        }
        s.add(info("single_atom_probe", "within_stick_cap", within_cap ? 1.0 : 0.0));
        if (within_cap) s.add(info("single_atom_probe", "sticks", static_cast<double>(ts.sticks)));
      }
      r.suites.push_back(std::move(s));
    }
  }
}

void run_identity(const ExperimentConfig& c, RunReport& r) {
  const auto& fs = c.functions;
  const double k = c.thresholds.se_multiplier;
  for (const double alpha : c.alphas) {
    for (const double theta : c.thetas) {
      Suite s = make_suite("identity(" + params_tag(alpha, theta) + ",n=" + std::to_string(c.n) + ")",
                           alpha, theta, c.n, c.replicates, c.seed);
      const PYParams shifted{alpha, theta + static_cast<double>(c.n) * alpha};
      auto direct = prior_draws(fs, c.replicates,
                                {"pitman_yor_direct", alpha, theta, c.n, derive_seed(s.seed, "direct")},
                                c.workers, [&](RandomStream& st, TruncationStats* ts) {
                                  return stick_breaking_sample(shifted, c.base, c.truncation, st, ts);
                                });
      auto composed = prior_draws(
          fs, c.replicates,
          {"pitman_yor_composition", alpha, theta, c.n, derive_seed(s.seed, "composition")},
          c.workers, [&](RandomStream& st, TruncationStats* ts) {
            return compose_identity_sample(alpha, theta, c.n, c.base, c.truncation, st, ts);
          });
      for (std::size_t j = 0; j < fs.size(); ++j) {
        const auto a = composed.values.column(j);
        const auto b = direct.values.column(j);
        const auto ks = ks_two_sample(a, b);
        const std::string label = fs[j].label();
        s.add(info(label, "ks_statistic", ks.statistic));
        s.add(claim_above(label, "p_value", ks.p_value, c.thresholds.p_min));
        const double var_theory = pd_variance(shifted, c.base, fs[j]);
        const auto ma = moments(a);
        const auto mb = moments(b);
        s.add(claim_abs(label, "mean_composition", ma.mean, integrate(c.base, fs[j]), k * ma.se_mean));
        s.add(claim_abs(label, "variance_composition", ma.variance, var_theory, k * ma.se_variance));
        s.add(claim_abs(label, "variance_direct", mb.variance, var_theory, k * mb.se_variance));
      }
      s.add(claim_at_most("weights", "max_total_weight_error",
                          std::max(direct.max_normalization_error, composed.max_normalization_error),
                          0.0, 1e-9));
      TruncationStats st = direct.stats;
      st.merge(composed.stats);
      add_truncation_rows(s, st);
      r.suites.push_back(std::move(s));
    }
  }
}

// Rows shared by every normality suite.
void add_normality_rows(Suite& s, const ReplicateSet& reps, const GaussianLimit& limit,
                        const std::vector<double>& exact_variance, const Thresholds& t,
                        const std::string& prefix) {
  const auto rep = normality_test(reps, limit, t);
  for (std::size_t j = 0; j < rep.functions.size(); ++j) {
    const auto& fr = rep.functions[j];
    const std::string label = prefix + fr.label;
    s.add(info(label, "ks_statistic", fr.ks_statistic));
    s.add(claim_above(label, "p_value", fr.p_value, t.p_min));
    if (exact_variance.empty()) {
      s.add(claim_rel(label, "variance", fr.empirical_variance, fr.theoretical_variance, t.cov_tol));
    } else {
      // Monte Carlo vs exact finite-n, and exact finite-n vs the limit.
      s.add(claim_rel(label, "variance", fr.empirical_variance, exact_variance[j], t.var_tol));
      s.add(claim_rel(label, "exact_vs_limit_variance", exact_variance[j], fr.theoretical_variance,
                      t.var_tol));
    }
    s.add(claim_below(label, "covariance_error", fr.covariance_error, t.cov_tol));
    const auto m = moments(reps.column(j));
    s.add(claim_abs(label, "mean", m.mean, 0.0, t.se_multiplier * m.se_mean));
  }
  s.add(claim_below(prefix + "all", "covariance_max_relative_error", rep.covariance_max_relative_error,
                    t.cov_tol));
}

void add_route_comparison(Suite& s, const ReplicateSet& a, const ReplicateSet& b,
                          const std::string& prefix, const Thresholds& t) {
  for (std::size_t j = 0; j < a.cols(); ++j) {
    const auto ks = ks_two_sample(a.column(j), b.column(j));
    const std::string label = prefix + a.labels()[j].label();
    s.add(info(label, "two_sample_ks_statistic", ks.statistic));
    s.add(claim_above(label, "two_sample_p_value", ks.p_value, t.p_min));
  }
}

void run_clt_pd(const ExperimentConfig& c, RunReport& r) {
  const auto& fs = c.functions;
  for (const double alpha : c.alphas) {
    for (const double theta : c.thetas) {
      Suite s = make_suite("clt_pd(" + params_tag(alpha, theta) + ",n=" + std::to_string(c.n) + ")",
                           alpha, theta, c.n, c.replicates, c.seed);
      const auto limit = gaussian_limit(LimitKind::PitmanYorLargeN, alpha, c.base, fs);
      const PYParams shifted{alpha, theta + static_cast<double>(c.n) * alpha};
      std::vector<double> exact(fs.size());
      for (std::size_t j = 0; j < fs.size(); ++j) {
        exact[j] = static_cast<double>(c.n) * pd_variance(shifted, c.base, fs[j]);
      }
      TruncationStats stats;
      std::vector<ReplicateSet> sets;
      for (const Route route : {Route::Direct, Route::Composition}) {
        const bool wanted = c.route == "both" || (route == Route::Direct) == (c.route == "direct");
        if (!wanted) continue;
        const std::string tag = route == Route::Direct ? "direct" : "composition";
        sets.push_back(centered_replicates_pd(alpha, theta, c.n, c.base, fs, c.replicates,
                                              c.truncation, route, derive_seed(s.seed, tag),
                                              c.workers, &stats));
        add_normality_rows(s, sets.back(), limit, exact, c.thresholds,
                           c.route == "both" ? tag + ":" : "");
      }
      if (sets.size() == 2) add_route_comparison(s, sets[0], sets[1], "direct_vs_composition:", c.thresholds);
      add_truncation_rows(s, stats);
      r.suites.push_back(std::move(s));
    }
  }
}

void run_clt_dirichlet(const ExperimentConfig& c, RunReport& r) {
  const auto& fs = c.functions;
  const auto limit = gaussian_limit(LimitKind::DirichletLargeTheta, 0.0, c.base, fs);
  const double total = c.dirichlet_theta;
  std::vector<double> exact(fs.size());
  for (std::size_t j = 0; j < fs.size(); ++j) exact[j] = total * pd_variance({0.0, total}, c.base, fs[j]);
  const Route route = c.route == "direct" ? Route::Direct : Route::Composition;
  std::vector<ReplicateSet> sets;
  for (const double kappa : c.kappas) {
    const auto n = static_cast<std::size_t>(std::llround(total / kappa));
    Suite s = make_suite("clt_dirichlet(kappa=" + format_number(kappa) + ",n=" + std::to_string(n) + ")",
                         0.0, total, n, c.replicates, c.seed);
    TruncationStats stats;
    sets.push_back(centered_replicates_dirichlet(kappa, n, c.base, fs, c.replicates, c.truncation,
                                                 route, s.seed, c.workers, &stats));
    add_normality_rows(s, sets.back(), limit, exact, c.thresholds, "");
    add_truncation_rows(s, stats);
    r.suites.push_back(std::move(s));
  }
  if (sets.size() > 1) {
    Suite s = make_suite("kappa_invariance(theta=" + format_number(total) + ")", 0.0, total, 0,
                         c.replicates, c.seed);
    for (std::size_t a = 0; a < sets.size(); ++a) {
      for (std::size_t b = a + 1; b < sets.size(); ++b) {
        add_route_comparison(s, sets[a], sets[b],
                             "kappa=" + format_number(c.kappas[a]) + "_vs_" +
                                 format_number(c.kappas[b]) + ":",
                             c.thresholds);
      }
    }
    r.suites.push_back(std::move(s));
  }
}

void run_bvm(const ExperimentConfig& c, RunReport& r) {
  const auto& fs = c.functions;
  RandomStream data_stream({derive_seed(c.seed, "data"), 0});
  std::vector<double> data(c.n);
  for (double& x : data) x = c.truth.sample(data_stream);
  const Measure pn = empirical_measure(data);
  for (const double alpha : c.alphas) {
    for (const double theta : c.thetas) {
      const PYParams params{alpha, theta};
      Suite s = make_suite("bvm(" + params_tag(alpha, theta) + ",n=" + std::to_string(c.n) + ")",
                           alpha, theta, c.n, c.replicates, c.seed);
      TruncationStats stats;
      const auto reps = bvm_replicates(data, params, c.base, fs, c.replicates, c.truncation, s.seed,
                                       c.workers, &stats);
      const auto limit = gaussian_limit(LimitKind::PosteriorBvm, alpha, c.base, fs, &pn);
      add_normality_rows(s, reps, limit, {}, c.thresholds, "");
      s.add(info("data", "n_distinct", static_cast<double>(summarize(data).distinct())));
      add_truncation_rows(s, stats);
      r.suites.push_back(std::move(s));
    }
  }
}

void run_consistency(const ExperimentConfig& c, RunReport& r) {
  const auto& t = c.thresholds;
  {
    const PYParams params{c.alpha, c.theta};
    Suite s = make_suite("consistency_continuous(" + params_tag(c.alpha, c.theta) + ")", c.alpha,
                         c.theta, c.n_list.back(), 0, c.seed);
    const auto curve = consistency_curve(params, c.base, c.truth, c.partition, c.n_list, s.seed);
    const auto target = consistency_target(params, c.base, c.truth, c.partition);
    const double gap = seminorm(target, cell_probs(c.truth, c.partition));
    s.add(info("target_vs_truth", "exact_gap", gap));
    std::vector<double> dist;
    for (const auto& p : curve) {
      dist.push_back(p.distance_to_target);
      Row a = info("target", "distance", p.distance_to_target);
      if (&p == &curve.back()) a = claim_below("target", "distance", p.distance_to_target, t.consistency_tol);
      a.n = p.n;
      s.add(std::move(a));
      // The truth is only unreachable when the limit sits visibly away from it.
      Row b = gap > t.inconsistency_gap
                  ? claim_above("truth", "distance", p.distance_to_truth, t.inconsistency_gap)
                  : info("truth", "distance", p.distance_to_truth);
      b.n = p.n;
      s.add(std::move(b));
    }
    s.add(claim_holds("target", "distance_decreasing", strictly_decreasing(dist)));
    r.suites.push_back(std::move(s));
  }
  for (const double alpha : c.alphas) {
    for (const double theta : c.thetas) {
      const PYParams params{alpha, theta};
      Suite s = make_suite("consistency_discrete(" + params_tag(alpha, theta) + ")", alpha, theta,
                           c.n_list.back(), 0, c.seed);
      const auto curve = consistency_curve(params, c.base, c.discrete_truth, c.partition, c.n_list, s.seed);
      for (const auto& p : curve) {
        Row a = &p == &curve.back() ? claim_below("truth", "distance", p.distance_to_truth, t.discrete_tol)
                                    : info("truth", "distance", p.distance_to_truth);
        a.n = p.n;
        s.add(std::move(a));
      }
      r.suites.push_back(std::move(s));
    }
  }
  for (const double alpha : c.alphas) {
    for (const double theta : c.thetas) {
      Suite s = make_suite("prior_concentration(" + params_tag(alpha, theta) + ")", alpha, theta, 0,
                           c.replicates, c.seed);
      TruncationStats stats;
      const auto pts = prior_concentration_check(alpha, theta, c.n_p_list, c.base, c.partition,
                                                 c.replicates, c.truncation, s.seed, c.workers, &stats);
      std::vector<double> est;
      for (const auto& p : pts) {
        Row row = claim_at_most("n_p=" + std::to_string(p.n_p), "estimate", p.estimate, p.bound,
                                t.bound_se_multiplier * p.std_error);
        row.n = p.n_p;
        s.add(std::move(row));
        est.push_back(p.estimate);
      }
      // With alpha = 0 the shifted parameter does not move, so there is no trend to check.
      if (alpha > 0.0 && est.size() > 1) {
        s.add(claim_holds("estimate", "decreasing_in_n_p", strictly_decreasing(est)));
      }
      add_truncation_rows(s, stats);
      r.suites.push_back(std::move(s));
    }
  }
}

void run_concentration(const ExperimentConfig& c, RunReport& r) {
  const auto& t = c.thresholds;
  for (const double alpha : c.alphas) {
    for (const double theta : c.thetas) {
      const PYParams params{alpha, theta};
      Suite s = make_suite("concentration(" + params_tag(alpha, theta) + ")", alpha, theta, 0,
                           c.replicates, c.seed);
      TruncationStats stats;
      std::vector<double> est;
      for (std::size_t i = 0; i < c.n_list.size(); ++i) {
        const std::size_t n = c.n_list[i];
        RandomStream data_stream({derive_seed(s.seed, "data"), i});
        std::vector<double> data(n);
        for (double& x : data) x = c.truth.sample(data_stream);
        const auto e = concentration_statistic(summarize(data), params, c.base, c.partition,
                                               c.replicates, c.truncation,
                                               derive_seed(s.seed, "n=" + std::to_string(n)),
                                               c.workers, &stats);
        Row row = claim_at_most("concentration", "estimate", e.estimate,
                                1.0 / (theta + static_cast<double>(n) + 1.0),
                                t.bound_se_multiplier * e.std_error);
        row.n = n;
        s.add(std::move(row));
        est.push_back(e.estimate);
      }
      if (est.size() > 1) s.add(claim_holds("concentration", "decreasing_in_n", strictly_decreasing(est)));
      add_truncation_rows(s, stats);
      r.suites.push_back(std::move(s));
    }
  }
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  RunReport r;
  r.experiment = c.experiment;
  r.config = c.resolved;
  const auto& e = c.experiment;
  if (e == "sample") {
    run_sample(c, r);
  } else if (e == "urn") {
    run_urn(c, r);
  } else if (e == "posterior") {
    run_posterior(c, r);
  } else if (e == "verify-moments") {
    run_moments(c, r);
  } else if (e == "verify-identity") {
    run_identity(c, r);
  } else if (e == "verify-clt-pd") {
    run_clt_pd(c, r);
  } else if (e == "verify-clt-dirichlet") {
    run_clt_dirichlet(c, r);
  } else if (e == "verify-bvm") {
    run_bvm(c, r);
  } else if (e == "consistency") {
    run_consistency(c, r);
  } else if (e == "concentration") {
    run_concentration(c, r);
  } else {
    usage("unknown experiment '" + e + "'");
  }
  r.finalize();
  r.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::string render(const RunReport& report, const std::string& format) {
  if (format == "json") return render_json(report);
  if (format == "csv") return render_csv(report);
  if (format == "payload") return render_payload(report);
  usage("format must be json or csv");
}

void write_report(const RunReport& report, const std::string& format, const std::string& path) {
  const std::string text = render(report, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace pdp
