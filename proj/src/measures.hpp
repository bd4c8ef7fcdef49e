#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rng.hpp"

namespace pdp {

struct Atom {
  double location;
  double weight;
};

/// Finite list of weighted point masses on the real line. Weights are positive
/// and sum to one within 1e-9; repeated locations are allowed until merged().
class AtomicMeasure {
 public:
  explicit AtomicMeasure(std::vector<Atom> atoms);

  std::span<const Atom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  double total_weight() const;

  /// Combines atoms sharing an exactly equal location, keeping first-appearance order.
  AtomicMeasure merged() const;

 private:
  std::vector<Atom> atoms_;
};

/// Bounded test function: 1_{(a,b]}, a polynomial evaluated at x clamped to
/// [lo, hi], or a constant.
class FunctionSpec {
 public:
  enum class Kind { Indicator, Polynomial, Constant };

  static FunctionSpec indicator(double a, double b);
  static FunctionSpec polynomial(std::vector<double> coefficients, double lo, double hi);
  static FunctionSpec constant(double c);

  double operator()(double x) const;

  Kind kind() const { return kind_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double value() const { return value_; }
  std::span<const double> coefficients() const { return coefficients_; }
  std::string label() const;

  /// Points where the function may fail to be a single polynomial.
  std::vector<double> breakpoints() const;
  /// Polynomial coefficients of the function on an open interval containing
  /// `x` and no breakpoint.
  std::vector<double> local_polynomial(double x) const;

 private:
  FunctionSpec() = default;

  Kind kind_ = Kind::Constant;
  double lower_ = 0.0;
  double upper_ = 0.0;
  double value_ = 0.0;
  std::vector<double> coefficients_;
};

class BaseMeasure {
 public:
  enum class Kind { Uniform01, StdNormal, FiniteSupport };

  static BaseMeasure uniform01();
  static BaseMeasure std_normal();
  static BaseMeasure finite_support(std::vector<double> points, std::vector<double> probs);

  Kind kind() const { return kind_; }
  bool is_atomic() const { return kind_ == Kind::FiniteSupport; }
  double sample(RandomStream& stream) const;
  double cdf(double x) const;
  std::span<const double> points() const { return points_; }
  std::span<const double> probs() const { return probs_; }
  std::string label() const;

 private:
  explicit BaseMeasure(Kind kind) : kind_(kind) {}

  Kind kind_;
  std::vector<double> points_;
  std::vector<double> probs_;
  std::vector<double> cumulative_;
};

using Measure = std::variant<AtomicMeasure, BaseMeasure>;

/// Cells (-inf, b1], (b1, b2], ..., (b_{m-1}, inf) from strictly increasing breakpoints.
class CellPartition {
 public:
  explicit CellPartition(std::vector<double> breakpoints);
  static CellPartition deciles();

  std::size_t cells() const { return breakpoints_.size() + 1; }
  std::size_t cell_of(double x) const;
  std::span<const double> breakpoints() const { return breakpoints_; }

 private:
  std::vector<double> breakpoints_;
};

double normal_cdf(double x);
double normal_pdf(double x);

double integrate(const AtomicMeasure& measure, const FunctionSpec& f);
double integrate(const BaseMeasure& measure, const FunctionSpec& f);
double integrate(const Measure& measure, const FunctionSpec& f);
/// out[j] = integrate(measure, functions[j]), in one pass over the atoms.
void integrate_all(const AtomicMeasure& measure, std::span<const FunctionSpec> functions,
                   std::span<double> out);

/// Integral of the pointwise product f*g.
double integrate_product(const AtomicMeasure& measure, const FunctionSpec& f, const FunctionSpec& g);
double integrate_product(const BaseMeasure& measure, const FunctionSpec& f, const FunctionSpec& g);
double integrate_product(const Measure& measure, const FunctionSpec& f, const FunctionSpec& g);

std::vector<double> cell_probs(const AtomicMeasure& measure, const CellPartition& partition);
std::vector<double> cell_probs(const BaseMeasure& measure, const CellPartition& partition);
std::vector<double> cell_probs(const Measure& measure, const CellPartition& partition);

/// Root-sum-of-squares distance between two cell-probability vectors.
double seminorm(std::span<const double> p, std::span<const double> q);

AtomicMeasure empirical_measure(std::span<const double> points);

template <class P, class Q>
std::vector<double> mix(double w, const P& p, const Q& q, const CellPartition& partition);

struct KsResult {
  double statistic;
  double p_value;
};

KsResult ks_one_sample_normal(std::span<const double> samples, double mean, double sd);
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// P(K > lambda) for the limiting Kolmogorov distribution.
double kolmogorov_survival(double lambda);
/// lambda with kolmogorov_survival(lambda) == p.
double kolmogorov_quantile_upper(double p);

}  // namespace pdp

#include "measures_inl.hpp"
