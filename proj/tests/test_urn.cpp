#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "errors.hpp"
#include "oracles.hpp"
#include "urn.hpp"

using namespace pdp;
using oracle::Fraction;

namespace {

const BaseMeasure uniform = BaseMeasure::uniform01();
const std::vector<double> example{0.3, 0.3, 0.7};

// Probability of observing the labelled sequence `blocks` (block index of
// each draw, in order) under the prediction rule, in exact arithmetic.
Fraction sequence_probability(const std::vector<int>& blocks, Fraction alpha, Fraction theta) {
  Fraction p(1);
  std::vector<long long> counts;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Fraction denom = theta + Fraction(static_cast<long long>(i));
    const auto b = static_cast<std::size_t>(blocks[i]);
    if (b == counts.size()) {
      const Fraction k(static_cast<long long>(counts.size()));
      p = p * (i == 0 ? Fraction(1) : (theta + k * alpha) / denom);
      counts.push_back(1);
    } else {
      p = p * ((Fraction(counts[b]) - alpha) / denom);
      ++counts[b];
    }
  }
  return p;
}

}  // namespace

TEST_CASE("summarize") {
  const auto empty = summarize(std::vector<double>{});
  CHECK(empty.n == 0);
  CHECK(empty.distinct() == 0);

  const auto s = summarize(example);
  CHECK(s.n == 3);
  REQUIRE(s.distinct() == 2);
  CHECK(s.blocks[0].location == 0.3);
  CHECK(s.blocks[0].count == 2);
  CHECK(s.blocks[1].location == 0.7);
  CHECK(s.blocks[1].count == 1);

  auto st = make_stream({40, 0});
  std::vector<double> data(5000);
  for (auto& x : data) x = uniform.sample(st);
  CHECK(summarize(data).distinct() == data.size());
}

TEST_CASE("predictive weights examples") {
  const auto w0 = predictive_weights(summarize(std::vector<double>{}), {0.5, 1.0});
  CHECK(w0.new_weight == 1.0);
  CHECK(w0.block_weights.empty());

  const auto w = predictive_weights(summarize(example), {0.5, 1.0});
  CHECK(w.new_weight == doctest::Approx(0.5).epsilon(1e-15));
  REQUIRE(w.block_weights.size() == 2);
  CHECK(w.block_weights[0] == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(w.block_weights[1] == doctest::Approx(0.125).epsilon(1e-15));

  const auto p = predictive_weights(summarize(example), {0.0, 2.0});
  CHECK(p.new_weight == doctest::Approx(2.0 / 5.0));
  CHECK(p.block_weights[0] == doctest::Approx(2.0 / 5.0));
  CHECK(p.block_weights[1] == doctest::Approx(1.0 / 5.0));
}

TEST_CASE("predictive weights total one on a random corpus") {
  auto s = make_stream({41, 0});
  for (int t = 0; t < 500; ++t) {
    const double alpha = 0.99 * s.uniform();
    const double theta = -alpha + 20 * s.uniform() + 1e-6;
    const std::size_t n = 1 + static_cast<std::size_t>(200 * s.uniform());
    const std::size_t support = 1 + static_cast<std::size_t>(50 * s.uniform());
    std::vector<double> data(n);
    for (auto& x : data) x = std::floor(s.uniform() * static_cast<double>(support));
    const auto w = predictive_weights(summarize(data), {alpha, theta});
    double total = w.new_weight;
    bool nonnegative = w.new_weight >= 0.0;
    for (const double b : w.block_weights) {
      total += b;
      nonnegative = nonnegative && b >= 0.0;
    }
    CHECK(nonnegative);
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("library weights agree with the exact prediction rule") {
  const Fraction alpha(1, 2);
  const Fraction theta(1);
  const auto w = predictive_weights(summarize(example), {0.5, 1.0});
  const Fraction denom = theta + Fraction(3);
  CHECK(w.new_weight == ((theta + Fraction(2) * alpha) / denom).value());
  CHECK(w.block_weights[0] == ((Fraction(2) - alpha) / denom).value());
  CHECK(w.block_weights[1] == ((Fraction(1) - alpha) / denom).value());
}

TEST_CASE("exchangeability of the pattern {{1,2},{3}}") {
  for (const auto& [a, t] : std::vector<std::pair<Fraction, Fraction>>{
           {Fraction(1, 2), Fraction(1)}, {Fraction(1, 4), Fraction(3, 2)}, {Fraction(0), Fraction(2)},
           {Fraction(3, 4), Fraction(-1, 2)}}) {
    // the pair shares a block; the singleton arrives first, second or last
    const auto p12 = sequence_probability({0, 0, 1}, a, t);
    const auto p13 = sequence_probability({0, 1, 0}, a, t);
    const auto p23 = sequence_probability({0, 1, 1}, a, t);
    CHECK(p12 == p13);
    CHECK(p12 == p23);
    // and the closed form (theta+alpha)(1-alpha) / ((theta+1)(theta+2))
    const auto closed = (t + a) * (Fraction(1) - a) / ((t + Fraction(1)) * (t + Fraction(2)));
    CHECK(p12 == closed);
  }
}

TEST_CASE("urn draw from the example summary") {
  const auto summary = summarize(example);
  auto s = make_stream({42, 0});
  const int m = 100000;
  int fresh = 0;
  for (int i = 0; i < m; ++i) {
    const auto d = urn_draw(summary, {0.5, 1.0}, uniform, s);
    std::size_t total = 0;
    for (const auto& b : d.summary.blocks) total += b.count;
    CHECK_MESSAGE(total == 4, "counts");
    CHECK_MESSAGE(d.summary.n == 4, "n");
    if (d.summary.distinct() == 3) ++fresh;
  }
  CHECK(std::abs(fresh / double(m) - 0.5) < 4 * std::sqrt(0.25 / m));

  const auto first = urn_draw(summarize(std::vector<double>{}), {0.5, 1.0}, uniform, s);
  CHECK(first.summary.distinct() == 1);
  CHECK(first.summary.n == 1);

  const auto fin = BaseMeasure::finite_support({0.1}, {1.0});
  CHECK_THROWS_AS(urn_draw(summary, {0.5, 1.0}, fin, s), DomainError);
}

TEST_CASE("urn sequences") {
  auto s = make_stream({43, 0});
  const auto one = urn_sequence({0.5, 1.0}, uniform, 1, s);
  CHECK(one.values.size() == 1);
  CHECK(one.summary.distinct() == 1);

  const auto seq = urn_sequence({0.5, 1.0}, BaseMeasure::std_normal(), 2000, s);
  const auto re = summarize(seq.values);
  REQUIRE(re.distinct() == seq.summary.distinct());
  for (std::size_t j = 0; j < re.distinct(); ++j) {
    CHECK(re.blocks[j].location == seq.summary.blocks[j].location);
    CHECK(re.blocks[j].count == seq.summary.blocks[j].count);
  }
  // fresh values never coincide: as many distinct locations as blocks opened
  std::set<double> locations;
  for (const auto& b : seq.summary.blocks) locations.insert(b.location);
  CHECK(locations.size() == seq.summary.distinct());
}

TEST_CASE("expected number of blocks matches the exact recursion") {
  // alpha=0: sum of theta/(theta+i)
  double polya = 0.0;
  for (int i = 0; i < 100; ++i) polya += 1.0 / (1.0 + i);
  CHECK(oracle::expected_blocks(0.0, 1.0, 100) == doctest::Approx(polya).epsilon(1e-12));

  std::uint64_t k = 0;
  for (const double alpha : {0.0, 0.5}) {
    auto s = make_stream({44, k++});
    std::vector<double> counts(10000);
    for (auto& c : counts) c = static_cast<double>(urn_sequence({alpha, 1.0}, uniform, 100, s).summary.distinct());
    const auto sm = oracle::summary(counts);
    CHECK(std::abs(sm.mean - oracle::expected_blocks(alpha, 1.0, 100)) < 4 * sm.se_mean);
    CHECK(std::abs(sm.var - oracle::variance_blocks(alpha, 1.0, 100)) < 4 * sm.se_var);
  }
}

TEST_CASE("ftilde") {
  CHECK_THROWS_AS(ftilde(summarize(std::vector<double>{}), 0.5), DomainError);

  const auto f = ftilde(summarize(example), 0.5);
  REQUIRE(f.size() == 2);
  CHECK(f.atoms()[0].weight == doctest::Approx(0.75));
  CHECK(f.atoms()[1].weight == doctest::Approx(0.25));

  const auto e = empirical_measure(example).merged();
  const auto f0 = ftilde(summarize(example), 0.0);
  for (std::size_t j = 0; j < e.size(); ++j) CHECK(f0.atoms()[j].weight == doctest::Approx(e.atoms()[j].weight));

  const std::vector<double> distinct{0.1, 0.4, 0.2, 0.9};
  const auto fd = ftilde(summarize(distinct), 0.6);
  for (const auto& atom : fd.atoms()) CHECK(atom.weight == doctest::Approx(0.25));

  // weights sum to one exactly in rational arithmetic: sum (e_j - a) = n - n(p) a
  const Fraction a(2, 7);
  Fraction total(0);
  const long long counts[] = {5, 1, 3, 1};
  for (const long long c : counts) total = total + (Fraction(c) - a) / (Fraction(10) - Fraction(4) * a);
  CHECK(total == Fraction(1));
}
