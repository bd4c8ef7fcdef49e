#pragma once

#include <cstddef>
#include <cstdint>

#include "measures.hpp"
#include "rng.hpp"

namespace pdp {

struct PYParams {
  double alpha = 0.0;
  double theta = 1.0;

  /// Throws ParameterError unless 0 <= alpha < 1 and theta > -alpha.
  void validate() const;
};

inline constexpr std::size_t kMaxSticks = 10'000'000;

/// How the mass left after the last kept stick is represented.
///
/// SingleAtom puts it on one fresh draw from the base measure. MomentMatched
/// does the same when the residual is already below eps; otherwise (stick
/// budget exhausted, or FixedK) it spreads the residual evenly over L fresh
/// atoms with L random in {a, a+1} chosen so that E[1/L] = (1-a)/(theta_K+1).
/// That reproduces the first two moments of the untruncated tail exactly.
enum class ResidualRule { MomentMatched, SingleAtom };

struct TruncationPolicy {
  enum class Kind { FixedK, TailMass };

  Kind kind = Kind::TailMass;
  std::size_t sticks = 0;  // FixedK only
  double eps = 1e-8;       // TailMass only
  ResidualRule residual = ResidualRule::MomentMatched;
  // TailMass with MomentMatched stops here even if the tail is still above eps.
  std::size_t stick_budget = 65536;

  static TruncationPolicy fixed_k(std::size_t k);
  static TruncationPolicy tail_mass(double eps);

  void validate() const;
};

/// Per-sample bookkeeping, accumulated across calls when the same object is reused.
struct TruncationStats {
  std::uint64_t samples = 0;
  std::uint64_t sticks = 0;
  std::uint64_t residual_atoms = 0;
  double residual_mass = 0.0;
  double max_residual_mass = 0.0;
  std::uint64_t budget_stops = 0;

  void merge(const TruncationStats& other);
};

AtomicMeasure stick_breaking_sample(const PYParams& params, const BaseMeasure& base,
                                    const TruncationPolicy& trunc, RandomStream& stream,
                                    TruncationStats* stats = nullptr);

/// E[P(f) P(g)] under the prior, in closed form.
double moment_product(const PYParams& params, const BaseMeasure& base, const FunctionSpec& f,
                      const FunctionSpec& g);

double pd_variance(const PYParams& params, const BaseMeasure& base, const FunctionSpec& f);

/// (G_theta P_{a,theta} + sum_i G_{a,i} P^(i)_{a,a}) / (G_theta + sum_i G_{a,i}),
/// which has the law of P_{a, theta + n a}.
AtomicMeasure compose_identity_sample(double alpha, double theta, std::size_t n,
                                      const BaseMeasure& base, const TruncationPolicy& trunc,
                                      RandomStream& stream, TruncationStats* stats = nullptr);

/// Gamma-weighted combination of n independent P_{0,kappa}; a Dirichlet
/// process with total mass n*kappa.
AtomicMeasure dirichlet_decomposition_sample(double kappa, std::size_t n, const BaseMeasure& base,
                                             const TruncationPolicy& trunc, RandomStream& stream,
                                             TruncationStats* stats = nullptr);

}  // namespace pdp
