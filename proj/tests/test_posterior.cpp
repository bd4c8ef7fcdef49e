#include <doctest.h>

#include <cmath>
#include <vector>

#include "errors.hpp"
#include "oracles.hpp"
#include "posterior.hpp"

using namespace pdp;

namespace {

const BaseMeasure uniform = BaseMeasure::uniform01();
const FunctionSpec half = FunctionSpec::indicator(0.0, 0.5);
const std::vector<double> example{0.3, 0.3, 0.7};

TruncationPolicy budgeted(std::size_t budget) {
  auto t = TruncationPolicy::tail_mass(1e-8);
  t.stick_budget = budget;
  return t;
}

std::vector<double> draw_data(const BaseMeasure& truth, std::size_t n, std::uint64_t seed) {
  auto s = make_stream({seed, 0});
  std::vector<double> x(n);
  for (auto& v : x) v = truth.sample(s);
  return x;
}

// Exact posterior variance of P(f) via the test-side oracle.
double exact_variance(const PartitionSummary& summary, const PYParams& p, const BaseMeasure& base,
                      const FunctionSpec& f) {
  std::vector<double> counts;
  std::vector<double> fy;
  for (const auto& b : summary.blocks) {
    counts.push_back(static_cast<double>(b.count));
    fy.push_back(f(b.location));
  }
  return oracle::posterior_variance(p.alpha, p.theta, counts, fy, integrate(base, f),
                                    integrate_product(base, f, f));
}

}  // namespace

TEST_CASE("posterior needs data") {
  auto s = make_stream({1, 0});
  CHECK_THROWS_AS(posterior_sample(summarize(std::vector<double>{}), {0.5, 1.0}, uniform, budgeted(64), s),
                  DomainError);
}

TEST_CASE("posterior draw structure") {
  const auto summary = summarize(example);
  auto s = make_stream({50, 0});
  for (int i = 0; i < 100; ++i) {
    const auto d = posterior_sample(summary, {0.5, 1.0}, uniform, budgeted(256), s);
    CHECK(d.r > 0.0);
    CHECK(d.r < 1.0);
    CHECK(std::abs(d.r + d.r_complement - 1.0) < 1e-12);
    REQUIRE(d.dn.size() == 2);
    CHECK(d.dn.atoms()[0].location == 0.3);
    CHECK(d.dn.atoms()[1].location == 0.7);
    CHECK(std::abs(d.combined.total_weight() - 1.0) < 1e-9);
    for (const auto& f : {half, FunctionSpec::polynomial({0.3, -1, 2}, 0.0, 1.0)}) {
      const double lhs = integrate(d.combined, f);
      const double rhs = d.r * integrate(d.continuous_part, f) + d.r_complement * integrate(d.dn, f);
      CHECK(std::abs(lhs - rhs) < 1e-12);
    }
  }
}

TEST_CASE("beta factor moments") {
  const auto summary = summarize(example);
  auto s = make_stream({51, 0});
  std::vector<double> r(100000);
  std::vector<double> r2(100000);
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = posterior_sample(summary, {0.5, 1.0}, uniform, budgeted(32), s).r;
    r2[i] = r[i] * r[i];
  }
  const auto a = oracle::summary(r);
  const auto b = oracle::summary(r2);
  CHECK(std::abs(a.mean - 0.5) < 4 * a.se_mean);
  CHECK(std::abs(b.mean - 0.3) < 4 * b.se_mean);
}

TEST_CASE("alpha=0 gives the Ferguson posterior") {
  const auto summary = summarize(example);
  auto s = make_stream({52, 0});
  std::vector<double> r(50000);
  std::vector<double> w(50000);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto d = posterior_sample(summary, {0.0, 1.0}, uniform, budgeted(32), s);
    r[i] = d.r;
    w[i] = d.dn.atoms()[0].weight;
  }
  // r ~ beta(1, 3), dn ~ Dirichlet(2, 1)
  const auto a = oracle::summary(r);
  CHECK(std::abs(a.mean - 0.25) < 4 * a.se_mean);
  CHECK(std::abs(a.var - 3.0 / 80.0) < 4 * a.se_var);
  const auto b = oracle::summary(w);
  CHECK(std::abs(b.mean - 2.0 / 3.0) < 4 * b.se_mean);
  CHECK(std::abs(b.var - 2.0 / 36.0) < 4 * b.se_var);
}

TEST_CASE("posterior mean examples") {
  const CellPartition mid({0.5});
  const auto m = posterior_mean(summarize(example), {0.5, 1.0}, uniform, mid);
  CHECK(m[0] == doctest::Approx(0.625));
  CHECK(m[1] == doctest::Approx(0.375));
  CHECK(posterior_mean(summarize(std::vector<double>{}), {0.5, 1.0}, uniform, CellPartition::deciles()) ==
        cell_probs(uniform, CellPartition::deciles()));
  CHECK(posterior_mean_of(summarize(example), {0.5, 1.0}, uniform, half) == doctest::Approx(0.625));
}

TEST_CASE("averaging posterior draws reproduces the posterior mean") {
  auto data = draw_data(uniform, 20, 53);
  data.push_back(data[0]);
  data.push_back(data[0]);
  data.push_back(data[3]);
  const auto summary = summarize(data);
  const PYParams p{0.5, 1.0};
  const auto partition = CellPartition::deciles();
  const auto target = posterior_mean(summary, p, uniform, partition);
  auto s = make_stream({53, 1});
  std::vector<std::vector<double>> cells(partition.cells(), std::vector<double>(20000));
  for (std::size_t i = 0; i < 20000; ++i) {
    const auto c = cell_probs(posterior_sample(summary, p, uniform, budgeted(256), s).combined, partition);
    for (std::size_t j = 0; j < c.size(); ++j) cells[j][i] = c[j];
  }
  for (std::size_t j = 0; j < cells.size(); ++j) {
    const auto sm = oracle::summary(cells[j]);
    CHECK(std::abs(sm.mean - target[j]) < 4 * sm.se_mean);
  }
}

TEST_CASE("concentration statistic matches the exact cell variances") {
  const auto partition = CellPartition::deciles();
  std::uint64_t k = 0;
  for (const PYParams p : {PYParams{0.0, 1.0}, PYParams{0.5, 1.0}, PYParams{0.75, 5.0}}) {
    for (const std::size_t n : {10, 100}) {
      CAPTURE(p.alpha);
      CAPTURE(n);
      const auto summary = summarize(draw_data(uniform, n, 60 + k++));
      const auto est = concentration_statistic(summary, p, uniform, partition, 4000, budgeted(256), 7);
      double exact = 0.0;
      const std::vector<double> b(partition.breakpoints().begin(), partition.breakpoints().end());
      for (std::size_t i = 0; i < partition.cells(); ++i) {
        const double lo = i == 0 ? -1e300 : b[i - 1];
        const double hi = i + 1 == partition.cells() ? 1e300 : b[i];
        exact += exact_variance(summary, p, uniform, FunctionSpec::indicator(lo, hi));
      }
      CHECK(std::abs(est.estimate - exact) < 4 * est.std_error);
      CHECK(est.estimate <= 1.0 / (p.theta + static_cast<double>(n) + 1) + 3 * est.std_error);
    }
  }
}

TEST_CASE("concentration bound value and trend") {
  CHECK(1.0 / (1.0 + 9 + 1) == doctest::Approx(0.090909).epsilon(1e-5));
  const auto partition = CellPartition::deciles();
  double previous = 1.0;
  for (const std::size_t n : {10, 100, 1000}) {
    const auto summary = summarize(draw_data(uniform, n, 70));
    const auto est = concentration_statistic(summary, {0.5, 1.0}, uniform, partition, 1000, budgeted(128), 8);
    CHECK(est.estimate < previous);
    previous = est.estimate;
  }
  const auto summary = summarize(draw_data(uniform, 10, 70));
  CHECK_THROWS_AS(concentration_statistic(summary, {0.5, 1.0}, uniform, partition, 99, budgeted(64), 8),
                  ParameterError);
}

TEST_CASE("bvm replicates are centred and match the exact finite-n variance") {
  const auto data = draw_data(uniform, 2000, 80);
  const auto summary = summarize(data);
  const std::vector<FunctionSpec> fs{FunctionSpec::indicator(0.0, 0.25), half,
                                     FunctionSpec::polynomial({0, 0, 1}, 0.0, 1.0)};
  for (const double alpha : {0.0, 0.5}) {
    CAPTURE(alpha);
    const PYParams p{alpha, 1.0};
    const auto reps = bvm_replicates(data, p, uniform, fs, 4000, budgeted(2048), 9, 1);
    REQUIRE(reps.rows() == 4000);
    for (std::size_t j = 0; j < fs.size(); ++j) {
      const auto sm = oracle::summary(reps.column(j));
      const double exact = 2000.0 * exact_variance(summary, p, uniform, fs[j]);
      CHECK(std::abs(sm.mean) < 4 * sm.se_mean);
      CHECK(std::abs(sm.var - exact) < 4 * sm.se_var);
    }
  }
}

// With data from P0 = U(0,1) and base H = N(0,1) the shift P_n(f) - H(f) is
// large, which separates the weight alpha(1-alpha) on the squared shift from
// a plain alpha.
TEST_CASE("limit variance with data far from the base measure") {
  const auto data = draw_data(uniform, 2000, 81);
  const auto summary = summarize(data);
  const auto normal = BaseMeasure::std_normal();
  const double alpha = 0.5;
  const PYParams p{alpha, 1.0};
  const double pn = integrate(empirical_measure(data), half);
  const double hf = integrate(normal, half);
  const double shift = pn - hf;
  const double base_terms = (1 - alpha) * (pn - pn * pn) + alpha * (1 - alpha) * (hf - hf * hf);
  const double corrected = base_terms + alpha * (1 - alpha) * shift * shift;
  const double uncorrected = base_terms + alpha * shift * shift;

  const double exact = 2000.0 * exact_variance(summary, p, normal, half);
  CHECK(std::abs(exact - corrected) < 0.01 * corrected);
  CHECK(std::abs(exact - uncorrected) > 0.08 * uncorrected);

  const auto reps = bvm_replicates(data, p, normal, {half}, 5000, budgeted(2048), 10, 1);
  const auto sm = oracle::summary(reps.column(0));
  CHECK(std::abs(sm.var - exact) < 4 * sm.se_var);
  CHECK(std::abs(sm.var - corrected) < std::abs(sm.var - uncorrected));
}

TEST_CASE("data weights are normalised gammas") {
  const auto data = draw_data(uniform, 10, 90);
  const auto summary = summarize(data);
  const double alpha = 0.5;
  auto s = make_stream({90, 1});
  std::vector<double> route_a(10000);
  std::vector<double> route_b(10000);
  for (auto& v : route_a) v = posterior_sample(summary, {alpha, 1.0}, uniform, budgeted(16), s).dn.atoms()[0].weight;
  for (auto& v : route_b) {
    std::vector<double> g(10);
    double total = 0.0;
    for (auto& x : g) total += x = draw_gamma(s, 1 - alpha);
    v = g[0] / total;
  }
  CHECK(ks_two_sample(route_a, route_b).p_value > 0.001);
}
