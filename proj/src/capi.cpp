#include "pdplab/pdp_lab.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include <json.hpp>

#include "errors.hpp"
#include "experiment.hpp"
#include "py_sampler.hpp"
#include "report.hpp"
#include "rng.hpp"

struct pdp_stream {
  pdp::RandomStream stream;
};

struct pdp_measure {
  pdp::AtomicMeasure measure;
};

struct pdp_report {
  pdp::RunReport report;
  std::string out_path;
  std::string out_format;
};

namespace {

thread_local std::string last_error;

pdp_status status_of(pdp::ErrorKind kind) {
  switch (kind) {
    case pdp::ErrorKind::Parameter: return PDP_ERR_PARAMETER;
    case pdp::ErrorKind::Domain: return PDP_ERR_DOMAIN;
    case pdp::ErrorKind::Shape: return PDP_ERR_SHAPE;
    case pdp::ErrorKind::Resource: return PDP_ERR_RESOURCE;
    case pdp::ErrorKind::Io: return PDP_ERR_IO;
    case pdp::ErrorKind::Usage: return PDP_ERR_USAGE;
  }
  return PDP_ERR_INTERNAL;
}

template <class F>
pdp_status guarded(F&& f) {
  last_error.clear();
  try {
    f();
    return PDP_OK;
  } catch (const pdp::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const nlohmann::json::exception& e) {
    last_error = std::string("invalid JSON: ") + e.what();
    return PDP_ERR_USAGE;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return PDP_ERR_RESOURCE;
  } catch (const std::exception& e) {
    last_error = e.what();
    return PDP_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return PDP_ERR_INTERNAL;
  }
}

pdp_status null_argument(const char* what) {
  last_error = std::string("null argument: ") + what;
  return PDP_ERR_NULL_ARGUMENT;
}

pdp::BaseMeasure base_of(pdp_base_kind kind) {
  switch (kind) {
    case PDP_BASE_UNIFORM01: return pdp::BaseMeasure::uniform01();
    case PDP_BASE_STD_NORMAL: return pdp::BaseMeasure::std_normal();
  }
  throw pdp::ParameterError("unknown base kind " + std::to_string(static_cast<int>(kind)));
}

nlohmann::json parse_object(const char* text, const char* what) {
  if (text == nullptr || *text == '\0') return nlohmann::json::object();
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw pdp::UsageError(std::string(what) + " is not valid JSON");
  if (!j.is_object()) throw pdp::UsageError(std::string(what) + " must be a JSON object");
  return j;
}

}  // namespace

extern "C" {

const char* pdp_version(void) { return pdp::kLibraryVersion; }

const char* pdp_last_error(void) { return last_error.c_str(); }

const char* pdp_status_name(pdp_status status) {
  switch (status) {
    case PDP_OK: return "ok";
    case PDP_ERR_PARAMETER: return "parameter error";
    case PDP_ERR_DOMAIN: return "domain error";
    case PDP_ERR_SHAPE: return "shape error";
    case PDP_ERR_RESOURCE: return "resource error";
    case PDP_ERR_IO: return "I/O error";
    case PDP_ERR_USAGE: return "usage error";
    case PDP_ERR_NULL_ARGUMENT: return "null argument";
    case PDP_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

pdp_status pdp_stream_create(uint64_t master_seed, uint64_t stream_index, pdp_stream** out) {
  if (!out) return null_argument("out");
  return guarded([&] { *out = new pdp_stream{pdp::make_stream({master_seed, stream_index})}; });
}

void pdp_stream_destroy(pdp_stream* stream) { delete stream; }

pdp_status pdp_stream_uniform(pdp_stream* stream, double* out) {
  if (!stream) return null_argument("stream");
  if (!out) return null_argument("out");
  return guarded([&] { *out = stream->stream.uniform(); });
}

pdp_status pdp_draw_gamma(pdp_stream* stream, double shape, double* out) {
  if (!stream) return null_argument("stream");
  if (!out) return null_argument("out");
  return guarded([&] { *out = pdp::draw_gamma(stream->stream, shape); });
}

pdp_status pdp_draw_beta(pdp_stream* stream, double a, double b, double* out) {
  if (!stream) return null_argument("stream");
  if (!out) return null_argument("out");
  return guarded([&] { *out = pdp::draw_beta(stream->stream, a, b); });
}

pdp_status pdp_stick_breaking_sample(double alpha, double theta, pdp_base_kind base, double eps,
                                     pdp_stream* stream, pdp_measure** out) {
  if (!stream) return null_argument("stream");
  if (!out) return null_argument("out");
  return guarded([&] {
    auto m = pdp::stick_breaking_sample({alpha, theta}, base_of(base),
                                        pdp::TruncationPolicy::tail_mass(eps), stream->stream);
    *out = new pdp_measure{std::move(m)};
  });
}

size_t pdp_measure_size(const pdp_measure* measure) { return measure ? measure->measure.size() : 0; }

pdp_status pdp_measure_atoms(const pdp_measure* measure, double* locations, double* weights,
                             size_t capacity) {
  if (!measure) return null_argument("measure");
  return guarded([&] {
    const auto atoms = measure->measure.atoms();
    const size_t count = capacity < atoms.size() ? capacity : atoms.size();
    for (size_t i = 0; i < count; ++i) {
      if (locations) locations[i] = atoms[i].location;
      if (weights) weights[i] = atoms[i].weight;
    }
  });
}

void pdp_measure_destroy(pdp_measure* measure) { delete measure; }

pdp_status pdp_moment_product_indicators(double alpha, double theta, pdp_base_kind base, double fa,
                                         double fb, double ga, double gb, double* out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = pdp::moment_product({alpha, theta}, base_of(base), pdp::FunctionSpec::indicator(fa, fb),
                               pdp::FunctionSpec::indicator(ga, gb));
  });
}

pdp_status pdp_run_experiment(const char* experiment, const char* config_json,
                              const char* overrides_json, pdp_report** out) {
  if (!experiment) return null_argument("experiment");
  if (!out) return null_argument("out");
  return guarded([&] {
    const auto file = parse_object(config_json, "config");
    const auto overrides = parse_object(overrides_json, "overrides");
    const auto cfg = pdp::resolve_config(experiment, file, overrides);
    auto report = pdp::run_experiment(cfg);
    *out = new pdp_report{std::move(report), cfg.out, cfg.format};
  });
}

int pdp_report_pass(const pdp_report* report) { return report && report->report.pass ? 1 : 0; }

pdp_status pdp_report_render(const pdp_report* report, const char* format, char** out) {
  if (!report) return null_argument("report");
  if (!format) return null_argument("format");
  if (!out) return null_argument("out");
  return guarded([&] {
    const std::string text = pdp::render(report->report, format);
    char* buf = static_cast<char*>(std::malloc(text.size() + 1));
    if (!buf) throw std::bad_alloc();
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out = buf;
  });
}

pdp_status pdp_report_write(const pdp_report* report, const char* format, const char* path) {
  if (!report) return null_argument("report");
  if (!format) return null_argument("format");
  if (!path) return null_argument("path");
  return guarded([&] { pdp::write_report(report->report, format, path); });
}

const char* pdp_report_output_path(const pdp_report* report) {
  return report ? report->out_path.c_str() : "";
}

const char* pdp_report_output_format(const pdp_report* report) {
  return report ? report->out_format.c_str() : "json";
}

void pdp_report_destroy(pdp_report* report) { delete report; }

void pdp_string_free(char* s) { std::free(s); }

}  // extern "C"
