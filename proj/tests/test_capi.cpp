#include <doctest.h>

#include <pdplab/pdp_lab.h>

#include <cmath>
#include <string>
#include <vector>

TEST_CASE("version and status names") {
  CHECK(std::string(pdp_version()) == "0.1.0");
  CHECK(std::string(pdp_status_name(PDP_OK)) == "ok");
  CHECK(std::string(pdp_status_name(PDP_ERR_USAGE)) == "usage error");
}

TEST_CASE("streams") {
  pdp_stream* a = nullptr;
  pdp_stream* b = nullptr;
  REQUIRE(pdp_stream_create(1, 0, &a) == PDP_OK);
  REQUIRE(pdp_stream_create(1, 0, &b) == PDP_OK);
  for (int i = 0; i < 10; ++i) {
    double x = 0;
    double y = 0;
    CHECK(pdp_stream_uniform(a, &x) == PDP_OK);
    CHECK(pdp_stream_uniform(b, &y) == PDP_OK);
    CHECK(x == y);
  }
  double g = 0;
  CHECK(pdp_draw_gamma(a, 0.5, &g) == PDP_OK);
  CHECK(g > 0);
  CHECK(pdp_draw_gamma(a, -1.0, &g) == PDP_ERR_PARAMETER);
  CHECK(std::string(pdp_last_error()).find("shape") != std::string::npos);
  CHECK(pdp_draw_beta(a, 1.0, 0.0, &g) == PDP_ERR_PARAMETER);
  CHECK(pdp_stream_uniform(nullptr, &g) == PDP_ERR_NULL_ARGUMENT);
  CHECK(pdp_stream_uniform(a, nullptr) == PDP_ERR_NULL_ARGUMENT);
  pdp_stream_destroy(a);
  pdp_stream_destroy(b);
  pdp_stream_destroy(nullptr);
}

TEST_CASE("stick-breaking through the C API") {
  pdp_stream* s = nullptr;
  REQUIRE(pdp_stream_create(7, 0, &s) == PDP_OK);
  pdp_measure* m = nullptr;
  REQUIRE(pdp_stick_breaking_sample(0.25, 1.0, PDP_BASE_STD_NORMAL, 1e-8, s, &m) == PDP_OK);
  const std::size_t n = pdp_measure_size(m);
  REQUIRE(n > 0);
  std::vector<double> loc(n);
  std::vector<double> w(n);
  CHECK(pdp_measure_atoms(m, loc.data(), w.data(), n) == PDP_OK);
  double total = 0;
  for (const double x : w) total += x;
  CHECK(std::abs(total - 1.0) < 1e-9);
  pdp_measure_destroy(m);

  CHECK(pdp_stick_breaking_sample(1.0, 1.0, PDP_BASE_UNIFORM01, 1e-8, s, &m) == PDP_ERR_PARAMETER);
  CHECK(pdp_stick_breaking_sample(0.5, 1.0, PDP_BASE_UNIFORM01, 1e-8, nullptr, &m) == PDP_ERR_NULL_ARGUMENT);
  pdp_stream_destroy(s);
}

TEST_CASE("closed-form product moment") {
  double v = 0;
  REQUIRE(pdp_moment_product_indicators(0.5, 0.5, PDP_BASE_UNIFORM01, 0.0, 0.5, 0.0, 0.5, &v) == PDP_OK);
  CHECK(std::abs(v - 1.0 / 3.0) < 1e-14);
  CHECK(pdp_moment_product_indicators(0.5, -0.5, PDP_BASE_UNIFORM01, 0, 1, 0, 1, &v) == PDP_ERR_PARAMETER);
}

TEST_CASE("experiments through the C API") {
  pdp_report* r = nullptr;
  REQUIRE(pdp_run_experiment("verify-moments",
                             R"({"alphas":[0.25],"thetas":[1],"replicates":300,"single_atom_probe":false})",
                             R"({"truncation":{"stick_budget":64},"out":"/tmp/pdp_capi_report.csv","format":"csv"})",
                             &r) == PDP_OK);
  CHECK(pdp_report_pass(r) == 1);
  CHECK(std::string(pdp_report_output_path(r)) == "/tmp/pdp_capi_report.csv");
  CHECK(std::string(pdp_report_output_format(r)) == "csv");
  char* csv = nullptr;
  REQUIRE(pdp_report_render(r, "csv", &csv) == PDP_OK);
  CHECK(std::string(csv).rfind("experiment,alpha,theta,n,M,seed,label,statistic_name,value,theoretical_value,tolerance,pass\n", 0) == 0);
  pdp_string_free(csv);
  CHECK(pdp_report_write(r, "csv", "/tmp/pdp_capi_report.csv") == PDP_OK);
  CHECK(pdp_report_write(r, "json", "/nonexistent-dir/r.json") == PDP_ERR_IO);
  char* bad = nullptr;
  CHECK(pdp_report_render(r, "yaml", &bad) == PDP_ERR_USAGE);
  pdp_report_destroy(r);

  pdp_report* q = nullptr;
  CHECK(pdp_run_experiment("verify-moments", "{not json", nullptr, &q) == PDP_ERR_USAGE);
  CHECK(pdp_run_experiment("verify-moments", R"({"bogus":1})", nullptr, &q) == PDP_ERR_USAGE);
  CHECK(std::string(pdp_last_error()).find("bogus") != std::string::npos);
  CHECK(pdp_run_experiment("no-such-experiment", nullptr, nullptr, &q) == PDP_ERR_USAGE);
  CHECK(pdp_run_experiment(nullptr, nullptr, nullptr, &q) == PDP_ERR_NULL_ARGUMENT);
  CHECK(pdp_report_pass(nullptr) == 0);
}
