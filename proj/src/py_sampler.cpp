#include "py_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "format.hpp"

namespace pdp {

void PYParams::validate() const {
  if (!std::isfinite(alpha) || !std::isfinite(theta) || !(alpha >= 0.0 && alpha < 1.0) ||
      !(theta > -alpha)) {
    throw ParameterError("need 0 <= alpha < 1 and theta > -alpha, got alpha=" +
                         format_number(alpha) + " theta=" + format_number(theta));
  }
}

TruncationPolicy TruncationPolicy::fixed_k(std::size_t k) {
  TruncationPolicy t;
  t.kind = Kind::FixedK;
  t.sticks = k;
  return t;
}

TruncationPolicy TruncationPolicy::tail_mass(double eps) {
  TruncationPolicy t;
  t.kind = Kind::TailMass;
  t.eps = eps;
  return t;
}

void TruncationPolicy::validate() const {
  if (kind == Kind::FixedK) {
    if (sticks < 1 || sticks > kMaxSticks) {
      throw ParameterError("fixed truncation needs 1 <= K <= 1e7 sticks");
    }
  } else {
    if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("tail-mass eps must lie in (0, 1)");
    if (residual == ResidualRule::MomentMatched && (stick_budget < 1 || stick_budget > kMaxSticks)) {
      throw ParameterError("stick budget must lie in [1, 1e7]");
    }
  }
}

void TruncationStats::merge(const TruncationStats& other) {
  samples += other.samples;
  sticks += other.sticks;
  residual_atoms += other.residual_atoms;
  residual_mass += other.residual_mass;
  max_residual_mass = std::max(max_residual_mass, other.max_residual_mass);
  budget_stops += other.budget_stops;
}

namespace {

void require_non_atomic(const BaseMeasure& base) {
  if (base.is_atomic()) {
    throw DomainError("stick-breaking needs a non-atomic base measure, got " + base.label());
  }
}

// L in {a, a+1} with E[1/L] = t.
std::size_t moment_matched_count(double t, RandomStream& stream) {
  const double inv = 1.0 / t;
  if (!(inv < static_cast<double>(kMaxSticks))) {
    throw ResourceError("moment-matched residual would need more than 1e7 atoms");
  }
  const auto a = static_cast<std::size_t>(std::floor(inv));
  const double ad = static_cast<double>(a);
  if (ad == inv) return a;
  const double p = (t - 1.0 / (ad + 1.0)) / (1.0 / ad - 1.0 / (ad + 1.0));
  return stream.uniform() < p ? a : a + 1;
}

}  // namespace

AtomicMeasure stick_breaking_sample(const PYParams& params, const BaseMeasure& base,
                                    const TruncationPolicy& trunc, RandomStream& stream,
                                    TruncationStats* stats) {
  params.validate();
  trunc.validate();
  require_non_atomic(base);

  const double a = 1.0 - params.alpha;
  const bool tail = trunc.kind == TruncationPolicy::Kind::TailMass;
  const bool matched = trunc.residual == ResidualRule::MomentMatched;
  const std::size_t limit =
      tail ? (matched ? trunc.stick_budget : kMaxSticks) : trunc.sticks;

  std::vector<Atom> atoms;
  double rem = 1.0;
  std::size_t k = 0;
  while (k < limit && rem > 0.0 && !(tail && rem < trunc.eps)) {
    ++k;
    const auto v = draw_beta_pair(stream, a, params.theta + static_cast<double>(k) * params.alpha);
    const double w = v.value * rem;
    rem *= v.complement;
    const double z = base.sample(stream);
    if (w > 0.0) atoms.push_back({z, w});
  }
  if (tail && !matched && rem >= trunc.eps) {
    throw ResourceError("tail mass " + format_number(rem) + " still above eps=" +
                        format_number(trunc.eps) + " after 1e7 sticks; raise eps or use FixedK");
  }

  std::size_t residual_atoms = 0;
  if (rem > 0.0) {
    if (!matched || (tail && rem < trunc.eps)) {
      atoms.push_back({base.sample(stream), rem});
      residual_atoms = 1;
    } else {
      const double theta_k = params.theta + static_cast<double>(k) * params.alpha;
      const std::size_t l = moment_matched_count(a / (theta_k + 1.0), stream);
      const double w = rem / static_cast<double>(l);
      if (w > 0.0) {
        atoms.reserve(atoms.size() + l);
        for (std::size_t i = 0; i < l; ++i) atoms.push_back({base.sample(stream), w});
        residual_atoms = l;
      } else {
        atoms.push_back({base.sample(stream), rem});
        residual_atoms = 1;
      }
    }
  }
  if (stats) {
    ++stats->samples;
    stats->sticks += k;
    stats->residual_atoms += residual_atoms;
    stats->residual_mass += rem;
    stats->max_residual_mass = std::max(stats->max_residual_mass, rem);
    if (tail && rem >= trunc.eps) ++stats->budget_stops;
  }
  return AtomicMeasure(std::move(atoms));
}

double moment_product(const PYParams& params, const BaseMeasure& base, const FunctionSpec& f,
                      const FunctionSpec& g) {
  params.validate();
  const double a = params.alpha;
  const double t = params.theta;
  return (t + a) / (t + 1.0) * integrate(base, f) * integrate(base, g) +
         (1.0 - a) / (t + 1.0) * integrate_product(base, f, g);
}

double pd_variance(const PYParams& params, const BaseMeasure& base, const FunctionSpec& f) {
  const double hf = integrate(base, f);
  const double v = moment_product(params, base, f, f) - hf * hf;
  return std::max(v, 0.0);
}

namespace {

// Normalises log-weights and concatenates the scaled components.
AtomicMeasure combine(const std::vector<double>& log_weights,
                      const std::vector<AtomicMeasure>& parts) {
  const double m = *std::max_element(log_weights.begin(), log_weights.end());
  std::vector<double> w(log_weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) total += w[i] = std::exp(log_weights[i] - m);
  std::size_t count = 0;
  for (const auto& p : parts) count += p.size();
  std::vector<Atom> atoms;
  atoms.reserve(count);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const double scale = w[i] / total;
    for (const auto& atom : parts[i].atoms()) {
      const double x = scale * atom.weight;
      if (x > 0.0) atoms.push_back({atom.location, x});
    }
  }
  return AtomicMeasure(std::move(atoms));
}

}  // namespace

AtomicMeasure compose_identity_sample(double alpha, double theta, std::size_t n,
                                      const BaseMeasure& base, const TruncationPolicy& trunc,
                                      RandomStream& stream, TruncationStats* stats) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("composition route needs 0 < alpha < 1, got " + format_number(alpha));
  }
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw DomainError("composition route needs theta > 0, got " + format_number(theta));
  }
  if (n < 1) throw DomainError("composition route needs n >= 1");
  std::vector<double> log_w;
  std::vector<AtomicMeasure> parts;
  log_w.reserve(n + 1);
  parts.reserve(n + 1);
  log_w.push_back(draw_log_gamma(stream, theta));
  parts.push_back(stick_breaking_sample({alpha, theta}, base, trunc, stream, stats));
  for (std::size_t i = 0; i < n; ++i) {
    log_w.push_back(draw_log_gamma(stream, alpha));
    parts.push_back(stick_breaking_sample({alpha, alpha}, base, trunc, stream, stats));
  }
  return combine(log_w, parts);
}

AtomicMeasure dirichlet_decomposition_sample(double kappa, std::size_t n, const BaseMeasure& base,
                                             const TruncationPolicy& trunc, RandomStream& stream,
                                             TruncationStats* stats) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw ParameterError("kappa must be positive, got " + format_number(kappa));
  }
  if (n < 1) throw ParameterError("decomposition needs n >= 1");
  if (n == 1) return stick_breaking_sample({0.0, kappa}, base, trunc, stream, stats);
  std::vector<double> log_w;
  std::vector<AtomicMeasure> parts;
  log_w.reserve(n);
  parts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    log_w.push_back(draw_log_gamma(stream, kappa));
    parts.push_back(stick_breaking_sample({0.0, kappa}, base, trunc, stream, stats));
  }
  return combine(log_w, parts);
}

}  // namespace pdp
