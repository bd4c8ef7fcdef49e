/* C interface to the pdp-lab simulation library. All handles are opaque and
 * owned by the caller once returned; release them with the matching destroy
 * function. Functions returning pdp_status leave a message retrievable with
 * pdp_last_error() on the calling thread when they fail. */
#ifndef PDP_LAB_H
#define PDP_LAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PDP_BUILDING_LIBRARY)
#    define PDP_API __declspec(dllexport)
#  else
#    define PDP_API __declspec(dllimport)
#  endif
#else
#  define PDP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pdp_status {
  PDP_OK = 0,
  PDP_ERR_PARAMETER = 1,
  PDP_ERR_DOMAIN = 2,
  PDP_ERR_SHAPE = 3,
  PDP_ERR_RESOURCE = 4,
  PDP_ERR_IO = 5,
  PDP_ERR_USAGE = 6,
  PDP_ERR_NULL_ARGUMENT = 7,
  PDP_ERR_INTERNAL = 8
} pdp_status;

typedef enum pdp_base_kind { PDP_BASE_UNIFORM01 = 0, PDP_BASE_STD_NORMAL = 1 } pdp_base_kind;

typedef struct pdp_stream pdp_stream;
typedef struct pdp_measure pdp_measure;
typedef struct pdp_report pdp_report;

PDP_API const char* pdp_version(void);
/* Message for the most recent failure on this thread; empty if none. */
PDP_API const char* pdp_last_error(void);
PDP_API const char* pdp_status_name(pdp_status status);

/* Random streams: output is a pure function of (master_seed, stream_index). */
PDP_API pdp_status pdp_stream_create(uint64_t master_seed, uint64_t stream_index, pdp_stream** out);
PDP_API void pdp_stream_destroy(pdp_stream* stream);
PDP_API pdp_status pdp_stream_uniform(pdp_stream* stream, double* out);
PDP_API pdp_status pdp_draw_gamma(pdp_stream* stream, double shape, double* out);
PDP_API pdp_status pdp_draw_beta(pdp_stream* stream, double a, double b, double* out);

/* Stick-breaking draw truncated when the remaining stick falls below eps
 * (stick budget and residual handling at library defaults). */
PDP_API pdp_status pdp_stick_breaking_sample(double alpha, double theta, pdp_base_kind base,
                                             double eps, pdp_stream* stream, pdp_measure** out);
PDP_API size_t pdp_measure_size(const pdp_measure* measure);
/* Copies up to capacity atoms; either output pointer may be NULL. */
PDP_API pdp_status pdp_measure_atoms(const pdp_measure* measure, double* locations,
                                     double* weights, size_t capacity);
PDP_API void pdp_measure_destroy(pdp_measure* measure);

/* E[P(1_(fa,fb]) P(1_(ga,gb])] under the prior. */
PDP_API pdp_status pdp_moment_product_indicators(double alpha, double theta, pdp_base_kind base,
                                                 double fa, double fb, double ga, double gb,
                                                 double* out);

/* Runs an experiment. config_json and overrides_json are JSON objects (or
 * NULL); overrides win over config, which wins over built-in defaults. */
PDP_API pdp_status pdp_run_experiment(const char* experiment, const char* config_json,
                                      const char* overrides_json, pdp_report** out);
PDP_API int pdp_report_pass(const pdp_report* report);
/* format: "json", "csv" or "payload" (the json report without timing or
 * config). The returned string is released with pdp_string_free. */
PDP_API pdp_status pdp_report_render(const pdp_report* report, const char* format, char** out);
PDP_API pdp_status pdp_report_write(const pdp_report* report, const char* format, const char* path);
/* Resolved output path and format recorded in the report's config. */
PDP_API const char* pdp_report_output_path(const pdp_report* report);
PDP_API const char* pdp_report_output_format(const pdp_report* report);
PDP_API void pdp_report_destroy(pdp_report* report);
PDP_API void pdp_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* PDP_LAB_H */
