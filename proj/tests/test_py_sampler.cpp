#include <doctest.h>

#include <cmath>
#include <vector>

#include "errors.hpp"
#include "measures.hpp"
#include "oracles.hpp"
#include "py_sampler.hpp"
#include "rng.hpp"

using namespace pdp;

namespace {

const BaseMeasure uniform = BaseMeasure::uniform01();
const FunctionSpec half = FunctionSpec::indicator(0.0, 0.5);

TruncationPolicy budgeted(std::size_t budget) {
  auto t = TruncationPolicy::tail_mass(1e-8);
  t.stick_budget = budget;
  return t;
}

std::vector<double> values_of(const std::vector<AtomicMeasure>& ms, const FunctionSpec& f) {
  std::vector<double> out;
  out.reserve(ms.size());
  for (const auto& m : ms) out.push_back(integrate(m, f));
  return out;
}

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_NOTHROW((PYParams{0.0, 0.001}.validate()));
  CHECK_NOTHROW((PYParams{0.5, -0.49}.validate()));
  CHECK_THROWS_AS((PYParams{1.0, 1.0}.validate()), ParameterError);
  CHECK_THROWS_AS((PYParams{-0.1, 1.0}.validate()), ParameterError);
  CHECK_THROWS_AS((PYParams{0.5, -0.5}.validate()), ParameterError);
  auto s = make_stream({1, 0});
  CHECK_THROWS_AS(stick_breaking_sample({0.5, -0.6}, uniform, budgeted(64), s), ParameterError);
  CHECK_THROWS_AS(TruncationPolicy::fixed_k(0).validate(), ParameterError);
  CHECK_THROWS_AS(TruncationPolicy::tail_mass(0.0).validate(), ParameterError);
  CHECK_THROWS_AS(TruncationPolicy::tail_mass(1.0).validate(), ParameterError);
}

TEST_CASE("stick-breaking needs a non-atomic base") {
  auto s = make_stream({1, 0});
  const auto fin = BaseMeasure::finite_support({0.1, 0.2}, {0.5, 0.5});
  CHECK_THROWS_AS(stick_breaking_sample({0.5, 1.0}, fin, budgeted(64), s), DomainError);
}

TEST_CASE("alpha=0 theta=1 first weight is uniform") {
  auto s = make_stream({20, 0});
  std::vector<double> w(10000);
  for (auto& x : w) x = stick_breaking_sample({0.0, 1.0}, uniform, TruncationPolicy::fixed_k(1), s).atoms()[0].weight;
  CHECK(oracle::ks_uniform(w) < 0.025);
}

TEST_CASE("samples are normalised with positive weights") {
  const double alphas[] = {0.0, 0.3, 0.75, 0.95};
  const double thetas[] = {-0.2, 0.5, 10.0};
  std::uint64_t k = 0;
  for (const double a : alphas) {
    for (const double t : thetas) {
      if (!(t > -a)) continue;
      auto s = make_stream({21, k++});
      for (int rep = 0; rep < 20; ++rep) {
        for (const auto& trunc : {budgeted(512), TruncationPolicy::fixed_k(7), TruncationPolicy::tail_mass(1e-3)}) {
          const auto m = stick_breaking_sample({a, t}, BaseMeasure::std_normal(), trunc, s);
          bool positive = true;
          for (const auto& atom : m.atoms()) positive = positive && atom.weight > 0.0;
          CHECK(positive);
          CHECK(std::abs(integrate(m, FunctionSpec::constant(1.0)) - 1.0) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("single residual atom stays below eps") {
  auto trunc = TruncationPolicy::tail_mass(1e-6);
  trunc.residual = ResidualRule::SingleAtom;
  auto s = make_stream({22, 0});
  TruncationStats stats;
  for (int i = 0; i < 200; ++i) stick_breaking_sample({0.25, 1.0}, uniform, trunc, s, &stats);
  CHECK(stats.samples == 200);
  CHECK(stats.residual_atoms == 200);
  CHECK(stats.max_residual_mass < 1e-6);
  CHECK(stats.budget_stops == 0);
}

TEST_CASE("fixed truncation keeps exactly K sticks") {
  auto s = make_stream({23, 0});
  TruncationStats stats;
  for (int i = 0; i < 100; ++i) stick_breaking_sample({0.5, 1.0}, uniform, TruncationPolicy::fixed_k(12), s, &stats);
  CHECK(stats.sticks == 1200);
}

TEST_CASE("single-atom tail mass beyond the stick cap is a resource error") {
  auto trunc = TruncationPolicy::tail_mass(1e-8);
  trunc.residual = ResidualRule::SingleAtom;
  auto s = make_stream({24, 0});
  CHECK_THROWS_AS(stick_breaking_sample({0.9, 1.0}, uniform, trunc, s), ResourceError);
}

TEST_CASE("stick-breaking moments at alpha=0.5 theta=0.5") {
  auto s = make_stream({25, 0});
  std::vector<double> x(20000);
  std::vector<double> x2(20000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = integrate(stick_breaking_sample({0.5, 0.5}, uniform, budgeted(1024), s), half);
    x2[i] = x[i] * x[i];
  }
  const auto m1 = oracle::summary(x);
  const auto m2 = oracle::summary(x2);
  CHECK(std::abs(m1.mean - 0.5) < 4 * m1.se_mean);
  CHECK(std::abs(m2.mean - 1.0 / 3.0) < 4 * m2.se_mean);
}

TEST_CASE("mean property across the grid") {
  const std::vector<FunctionSpec> family{FunctionSpec::indicator(0.0, 0.25), half,
                                         FunctionSpec::indicator(0.0, 0.75),
                                         FunctionSpec::polynomial({0, 0, 1}, 0.0, 1.0)};
  std::uint64_t k = 0;
  for (const double a : {0.0, 0.25, 0.5, 0.75}) {
    for (const double t : {0.5, 1.0, 5.0}) {
      CAPTURE(a);
      CAPTURE(t);
      auto s = make_stream({26, k++});
      std::vector<AtomicMeasure> ms;
      for (int i = 0; i < 3000; ++i) ms.push_back(stick_breaking_sample({a, t}, uniform, budgeted(256), s));
      for (const auto& f : family) {
        const auto sm = oracle::summary(values_of(ms, f));
        CHECK(std::abs(sm.mean - integrate(uniform, f)) < 4 * sm.se_mean);
      }
    }
  }
}

// The mass left after K sticks is P_{alpha, theta + K alpha} scaled by the
// residual. Spreading it over L atoms with the right E[1/L] keeps second
// moments exact, while a single atom overstates them.
TEST_CASE("short fixed truncation: matched residual is exact, single atom is biased") {
  const PYParams p{0.5, 1.0};
  const double target = moment_product(p, uniform, half, half);
  auto s = make_stream({27, 0});
  std::vector<double> matched(40000);
  for (auto& v : matched) {
    const double x = integrate(stick_breaking_sample(p, uniform, TruncationPolicy::fixed_k(5), s), half);
    v = x * x;
  }
  const auto sm = oracle::summary(matched);
  CHECK(std::abs(sm.mean - target) < 4 * sm.se_mean);

  auto single = TruncationPolicy::fixed_k(5);
  single.residual = ResidualRule::SingleAtom;
  std::vector<double> biased(40000);
  for (auto& v : biased) {
    const double x = integrate(stick_breaking_sample(p, uniform, single, s), half);
    v = x * x;
  }
  const auto sb = oracle::summary(biased);
  CHECK(sb.mean - target > 6 * sb.se_mean);
}

TEST_CASE("moment_product examples") {
  const auto one = FunctionSpec::constant(1.0);
  for (const double a : {0.0, 0.4, 0.9}) {
    for (const double t : {-0.3, 1.0, 7.0}) {
      if (t > -a) CHECK(moment_product({a, t}, uniform, one, one) == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
  CHECK(moment_product({0.5, 0.5}, uniform, half, half) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  const auto g = FunctionSpec::indicator(0.25, 0.9);
  const double t = 3.0;
  const double hf = 0.5;
  const double hg = 0.65;
  const double hfg = 0.25;
  CHECK(moment_product({0.0, t}, uniform, half, g) == doctest::Approx((t * hf * hg + hfg) / (t + 1)).epsilon(1e-14));
}

TEST_CASE("pd_variance examples") {
  CHECK(pd_variance({0.5, 1.0}, uniform, FunctionSpec::constant(3.0)) == 0.0);
  CHECK(pd_variance({0.5, 2.0}, uniform, half) == doctest::Approx(1.0 / 24.0).epsilon(1e-14));
  double previous = pd_variance({0.0, 1.0}, uniform, half);
  for (double a = 0.05; a < 1.0; a += 0.05) {
    const double v = pd_variance({a, 1.0}, uniform, half);
    CHECK(v < previous);
    previous = v;
  }
  CHECK(pd_variance({0.999999, 1.0}, uniform, half) < 1e-6);
}

TEST_CASE("composition route checks its domain") {
  auto s = make_stream({1, 0});
  CHECK_THROWS_AS(compose_identity_sample(0.5, 0.0, 3, uniform, budgeted(64), s), DomainError);
  CHECK_THROWS_AS(compose_identity_sample(0.5, -0.2, 3, uniform, budgeted(64), s), DomainError);
  CHECK_THROWS_AS(compose_identity_sample(0.0, 1.0, 3, uniform, budgeted(64), s), DomainError);
  CHECK_THROWS_AS(compose_identity_sample(0.5, 1.0, 0, uniform, budgeted(64), s), DomainError);
}

TEST_CASE("composition route moments") {
  auto s = make_stream({28, 0});
  std::vector<AtomicMeasure> ms;
  for (int i = 0; i < 20000; ++i) ms.push_back(compose_identity_sample(0.5, 1.0, 10, uniform, budgeted(128), s));
  const auto x = values_of(ms, half);
  const auto sm = oracle::summary(x);
  CHECK(std::abs(sm.mean - 0.5) < 4 * sm.se_mean);
  CHECK(std::abs(sm.var - 0.5 / 7.0 * 0.25) < 4 * sm.se_var);

  // n large: still centred on H
  std::vector<double> big(2000);
  auto t = make_stream({28, 1});
  for (auto& v : big) v = integrate(compose_identity_sample(0.5, 1.0, 200, uniform, budgeted(64), t), half);
  const auto sb = oracle::summary(big);
  CHECK(std::abs(sb.mean - 0.5) < 4 * sb.se_mean);
}

TEST_CASE("composition route matches direct sampling in law") {
  for (const double a : {0.25, 0.75}) {
    CAPTURE(a);
    auto s = make_stream({29, static_cast<std::uint64_t>(a * 100)});
    std::vector<double> comp(10000);
    std::vector<double> direct(10000);
    for (auto& v : comp) v = integrate(compose_identity_sample(a, 1.0, 10, uniform, budgeted(128), s), half);
    for (auto& v : direct) v = integrate(stick_breaking_sample({a, 1.0 + 10 * a}, uniform, budgeted(128), s), half);
    CHECK(ks_two_sample(comp, direct).p_value > 0.001);
  }
}

TEST_CASE("dirichlet decomposition") {
  auto s = make_stream({30, 0});
  auto t = make_stream({30, 0});
  const auto one = dirichlet_decomposition_sample(2.0, 1, uniform, budgeted(256), s);
  const auto direct = stick_breaking_sample({0.0, 2.0}, uniform, budgeted(256), t);
  REQUIRE(one.size() == direct.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one.atoms()[i].location == direct.atoms()[i].location);
    CHECK(one.atoms()[i].weight == direct.atoms()[i].weight);
  }

  std::vector<double> x(20000);
  for (auto& v : x) v = integrate(dirichlet_decomposition_sample(1.0, 5, uniform, budgeted(256), s), half);
  const auto sm = oracle::summary(x);
  CHECK(std::abs(sm.var - 0.25 / 6.0) < 4 * sm.se_var);

  std::vector<double> d(10000);
  for (auto& v : d) v = integrate(stick_breaking_sample({0.0, 5.0}, uniform, budgeted(256), s), half);
  x.resize(10000);
  CHECK(ks_two_sample(x, d).p_value > 0.001);

  CHECK_THROWS_AS(dirichlet_decomposition_sample(0.0, 3, uniform, budgeted(64), s), ParameterError);
}
