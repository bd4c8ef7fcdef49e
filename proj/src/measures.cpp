#include "measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_map>

#include "errors.hpp"
#include "format.hpp"

namespace pdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double horner(std::span<const double> c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

std::vector<double> poly_multiply(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

// x^k * phi(x), taken as zero at +-infinity.
double power_times_pdf(double x, int k) {
  if (std::isinf(x)) return 0.0;
  return std::pow(x, k) * normal_pdf(x);
}

double normal_mass(double l, double r) {
  constexpr double s = std::numbers::sqrt2;
  if (l >= 0.0) return 0.5 * (std::erfc(l / s) - std::erfc(r / s));
  if (r <= 0.0) return 0.5 * (std::erfc(-r / s) - std::erfc(-l / s));
  return normal_cdf(r) - normal_cdf(l);
}

// Integral of a polynomial against the standard normal density over (l, r),
// via the recursion M_k = (k-1) M_{k-2} + l^{k-1} phi(l) - r^{k-1} phi(r).
double normal_poly_integral(const std::vector<double>& c, double l, double r) {
  if (c.empty()) return 0.0;
  std::vector<double> m(c.size());
  m[0] = normal_mass(l, r);
  if (m.size() > 1) m[1] = normal_pdf(std::isinf(l) ? kInf : l) - normal_pdf(std::isinf(r) ? kInf : r);
  for (std::size_t k = 2; k < m.size(); ++k) {
    const int km1 = static_cast<int>(k) - 1;
    m[k] = km1 * m[k - 2] + power_times_pdf(l, km1) - power_times_pdf(r, km1);
  }
  double total = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) total += c[k] * m[k];
  return total;
}

double uniform_poly_integral(const std::vector<double>& c, double l, double r) {
  l = std::max(l, 0.0);
  r = std::min(r, 1.0);
  if (!(r > l)) return 0.0;
  double total = 0.0;
  double lp = l;
  double rp = r;
  for (std::size_t k = 0; k < c.size(); ++k) {
    total += c[k] * (rp - lp) / static_cast<double>(k + 1);
    lp *= l;
    rp *= r;
  }
  return total;
}

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw ParameterError(std::string(what) + " must be finite");
}

}  // namespace

// ---------------------------------------------------------------------------
// AtomicMeasure

AtomicMeasure::AtomicMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw ParameterError("atomic measure needs at least one atom");
  double total = 0.0;
  for (const auto& a : atoms_) {
    if (!std::isfinite(a.location)) throw ParameterError("atom location must be finite");
    if (!(a.weight > 0.0) || !std::isfinite(a.weight)) {
      throw ParameterError("atom weights must be positive and finite");
    }
    total += a.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ParameterError("atom weights must sum to 1 within 1e-9, got " + format_number(total));
  }
}

namespace {

// Neumaier-compensated running sum. Samplers can emit ~1e6 equal residual
// atoms, where plain summation drifts by ~1e-10.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double t = sum + x;
    carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

}  // namespace

double AtomicMeasure::total_weight() const {
  CompensatedSum total;
  for (const auto& a : atoms_) total.add(a.weight);
  return total.value();
}

AtomicMeasure AtomicMeasure::merged() const {
  std::vector<Atom> out;
  std::unordered_map<double, std::size_t> index;
  for (const auto& a : atoms_) {
    auto [it, inserted] = index.try_emplace(a.location, out.size());
    if (inserted) {
      out.push_back(a);
    } else {
      out[it->second].weight += a.weight;
    }
  }
  return AtomicMeasure(std::move(out));
}

// ---------------------------------------------------------------------------
// FunctionSpec

FunctionSpec FunctionSpec::indicator(double a, double b) {
  if (std::isnan(a) || std::isnan(b) || !(a < b)) {
    throw ParameterError("indicator needs a < b");
  }
  FunctionSpec f;
  f.kind_ = Kind::Indicator;
  f.lower_ = a;
  f.upper_ = b;
  return f;
}

FunctionSpec FunctionSpec::polynomial(std::vector<double> coefficients, double lo, double hi) {
  if (coefficients.empty()) throw ParameterError("polynomial needs at least one coefficient");
  for (const double c : coefficients) require_finite(c, "polynomial coefficient");
  require_finite(lo, "polynomial domain");
  require_finite(hi, "polynomial domain");
  if (!(lo < hi)) throw ParameterError("polynomial domain needs lo < hi");
  FunctionSpec f;
  f.kind_ = Kind::Polynomial;
  f.lower_ = lo;
  f.upper_ = hi;
  f.coefficients_ = std::move(coefficients);
  return f;
}

FunctionSpec FunctionSpec::constant(double c) {
  require_finite(c, "constant function value");
  FunctionSpec f;
  f.kind_ = Kind::Constant;
  f.value_ = c;
  return f;
}

double FunctionSpec::operator()(double x) const {
  switch (kind_) {
    case Kind::Indicator:
      return (x > lower_ && x <= upper_) ? 1.0 : 0.0;
    case Kind::Polynomial:
      return horner(coefficients_, std::clamp(x, lower_, upper_));
    case Kind::Constant:
      return value_;
  }
  return 0.0;
}

std::string FunctionSpec::label() const {
  switch (kind_) {
    case Kind::Indicator:
      return "ind(" + format_number(lower_) + "," + format_number(upper_) + "]";
    case Kind::Polynomial: {
      std::string s = "poly[";
      for (std::size_t i = 0; i < coefficients_.size(); ++i) {
        if (i) s += ",";
        s += format_number(coefficients_[i]);
      }
      return s + "]@[" + format_number(lower_) + "," + format_number(upper_) + "]";
    }
    case Kind::Constant:
      return "const(" + format_number(value_) + ")";
  }
  return {};
}

std::vector<double> FunctionSpec::breakpoints() const {
  std::vector<double> out;
  if (kind_ == Kind::Indicator) {
    if (std::isfinite(lower_)) out.push_back(lower_);
    if (std::isfinite(upper_)) out.push_back(upper_);
  } else if (kind_ == Kind::Polynomial) {
    out = {lower_, upper_};
  }
  return out;
}

std::vector<double> FunctionSpec::local_polynomial(double x) const {
  switch (kind_) {
    case Kind::Indicator:
      return (*this)(x) != 0.0 ? std::vector<double>{1.0} : std::vector<double>{};
    case Kind::Polynomial:
      if (x < lower_) return {horner(coefficients_, lower_)};
      if (x > upper_) return {horner(coefficients_, upper_)};
      return coefficients_;
    case Kind::Constant:
      return value_ != 0.0 ? std::vector<double>{value_} : std::vector<double>{};
  }
  return {};
}

// ---------------------------------------------------------------------------
// BaseMeasure

BaseMeasure BaseMeasure::uniform01() { return BaseMeasure(Kind::Uniform01); }
BaseMeasure BaseMeasure::std_normal() { return BaseMeasure(Kind::StdNormal); }

BaseMeasure BaseMeasure::finite_support(std::vector<double> points, std::vector<double> probs) {
  if (points.empty() || points.size() != probs.size()) {
    throw ShapeError("finite support needs matching, nonempty points and probs");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    require_finite(points[i], "support point");
    if (!(probs[i] >= 0.0) || !std::isfinite(probs[i])) {
      throw ParameterError("support probabilities must be nonnegative");
    }
    total += probs[i];
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ParameterError("support probabilities must sum to 1 within 1e-9");
  }
  BaseMeasure m(Kind::FiniteSupport);
  m.points_ = std::move(points);
  m.probs_ = std::move(probs);
  m.cumulative_.resize(m.probs_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < m.probs_.size(); ++i) m.cumulative_[i] = acc += m.probs_[i];
  return m;
}

double BaseMeasure::sample(RandomStream& stream) const {
  switch (kind_) {
    case Kind::Uniform01:
      return stream.uniform();
    case Kind::StdNormal:
      return stream.normal();
    case Kind::FiniteSupport:
      return points_[draw_index(stream, probs_, cumulative_.back())];
  }
  return 0.0;
}

double BaseMeasure::cdf(double x) const {
  switch (kind_) {
    case Kind::Uniform01:
      return std::clamp(x, 0.0, 1.0);
    case Kind::StdNormal:
      return normal_cdf(x);
    case Kind::FiniteSupport: {
      double acc = 0.0;
      for (std::size_t i = 0; i < points_.size(); ++i)
        if (points_[i] <= x) acc += probs_[i];
      return std::min(acc, 1.0);
    }
  }
  return 0.0;
}

std::string BaseMeasure::label() const {
  switch (kind_) {
    case Kind::Uniform01:
      return "uniform01";
    case Kind::StdNormal:
      return "std_normal";
    case Kind::FiniteSupport:
      return "finite_support";
  }
  return {};
}

// ---------------------------------------------------------------------------
// CellPartition

CellPartition::CellPartition(std::vector<double> breakpoints) : breakpoints_(std::move(breakpoints)) {
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    require_finite(breakpoints_[i], "partition breakpoint");
    if (i > 0 && !(breakpoints_[i] > breakpoints_[i - 1])) {
      throw ParameterError("partition breakpoints must be strictly increasing");
    }
  }
}

CellPartition CellPartition::deciles() {
  return CellPartition({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});
}

std::size_t CellPartition::cell_of(double x) const {
  return static_cast<std::size_t>(
      std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x) - breakpoints_.begin());
}

// ---------------------------------------------------------------------------
// Integration

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) {
  if (std::isinf(x)) return 0.0;
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}


double integrate(const AtomicMeasure& measure, const FunctionSpec& f) {
  CompensatedSum total;
  for (const auto& a : measure.atoms()) total.add(a.weight * f(a.location));
  return total.value();
}

void integrate_all(const AtomicMeasure& measure, std::span<const FunctionSpec> functions,
                   std::span<double> out) {
  if (out.size() != functions.size()) throw ShapeError("integrate_all output size mismatch");
  std::vector<CompensatedSum> totals(functions.size());
  for (const auto& a : measure.atoms()) {
    for (std::size_t j = 0; j < functions.size(); ++j) totals[j].add(a.weight * functions[j](a.location));
  }
  for (std::size_t j = 0; j < functions.size(); ++j) out[j] = totals[j].value();
}

double integrate(const BaseMeasure& measure, const FunctionSpec& f) {
  return integrate_product(measure, f, FunctionSpec::constant(1.0));
}

double integrate(const Measure& measure, const FunctionSpec& f) {
  return std::visit([&](const auto& m) { return integrate(m, f); }, measure);
}

double integrate_product(const AtomicMeasure& measure, const FunctionSpec& f, const FunctionSpec& g) {
  CompensatedSum total;
  for (const auto& a : measure.atoms()) total.add(a.weight * f(a.location) * g(a.location));
  return total.value();
}

double integrate_product(const BaseMeasure& measure, const FunctionSpec& f, const FunctionSpec& g) {
  if (measure.kind() == BaseMeasure::Kind::FiniteSupport) {
    double total = 0.0;
    const auto pts = measure.points();
    const auto pr = measure.probs();
    for (std::size_t i = 0; i < pts.size(); ++i) total += pr[i] * f(pts[i]) * g(pts[i]);
    return total;
  }
  // Both factors are polynomials between consecutive breakpoints; integrate
  // piece by piece in closed form. Breakpoints carry no mass here.
  std::vector<double> cuts = f.breakpoints();
  const auto gb = g.breakpoints();
  cuts.insert(cuts.end(), gb.begin(), gb.end());
  if (measure.kind() == BaseMeasure::Kind::Uniform01) {
    cuts.push_back(0.0);
    cuts.push_back(1.0);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<double> edges;
  edges.reserve(cuts.size() + 2);
  edges.push_back(-kInf);
  edges.insert(edges.end(), cuts.begin(), cuts.end());
  edges.push_back(kInf);

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double l = edges[i];
    const double r = edges[i + 1];
    double probe;
    if (std::isinf(l) && std::isinf(r)) {
      probe = 0.0;
    } else if (std::isinf(l)) {
      probe = r - 1.0;
    } else if (std::isinf(r)) {
      probe = l + 1.0;
    } else {
      probe = 0.5 * (l + r);
    }
    const auto piece = poly_multiply(f.local_polynomial(probe), g.local_polynomial(probe));
    if (piece.empty()) continue;
    total += measure.kind() == BaseMeasure::Kind::Uniform01 ? uniform_poly_integral(piece, l, r)
                                                            : normal_poly_integral(piece, l, r);
  }
  return total;
}

double integrate_product(const Measure& measure, const FunctionSpec& f, const FunctionSpec& g) {
  return std::visit([&](const auto& m) { return integrate_product(m, f, g); }, measure);
}

// ---------------------------------------------------------------------------
// Cells

std::vector<double> cell_probs(const AtomicMeasure& measure, const CellPartition& partition) {
  if (partition.cells() == 1) return {1.0};
  std::vector<double> out(partition.cells(), 0.0);
  for (const auto& a : measure.atoms()) out[partition.cell_of(a.location)] += a.weight;
  return out;
}

std::vector<double> cell_probs(const BaseMeasure& measure, const CellPartition& partition) {
  if (partition.cells() == 1) return {1.0};
  std::vector<double> out(partition.cells(), 0.0);
  if (measure.kind() == BaseMeasure::Kind::FiniteSupport) {
    const auto pts = measure.points();
    const auto pr = measure.probs();
    for (std::size_t i = 0; i < pts.size(); ++i) out[partition.cell_of(pts[i])] += pr[i];
    return out;
  }
  const auto b = partition.breakpoints();
  double previous = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double c = measure.cdf(b[i]);
    out[i] = c - previous;
    previous = c;
  }
  // Upper tail computed directly to keep precision for the normal.
  out.back() = measure.kind() == BaseMeasure::Kind::StdNormal ? normal_cdf(-b.back())
                                                              : 1.0 - previous;
  return out;
}

std::vector<double> cell_probs(const Measure& measure, const CellPartition& partition) {
  return std::visit([&](const auto& m) { return cell_probs(m, partition); }, measure);
}

double seminorm(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw ShapeError("seminorm needs equal-length vectors, got " + std::to_string(p.size()) +
                     " and " + std::to_string(q.size()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - q[i];
    total += d * d;
  }
  return std::sqrt(total);
}

AtomicMeasure empirical_measure(std::span<const double> points) {
  if (points.empty()) throw ParameterError("empirical measure needs at least one point");
  const double w = 1.0 / static_cast<double>(points.size());
  std::vector<Atom> atoms;
  atoms.reserve(points.size());
  std::unordered_map<double, std::size_t> index;
  std::vector<std::size_t> counts;
  for (const double x : points) {
    auto [it, inserted] = index.try_emplace(x, atoms.size());
    if (inserted) {
      atoms.push_back({x, 0.0});
      counts.push_back(0);
    }
    ++counts[it->second];
  }
  for (std::size_t i = 0; i < atoms.size(); ++i) atoms[i].weight = static_cast<double>(counts[i]) * w;
  return AtomicMeasure(std::move(atoms));
}

}  // namespace pdp
