#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "measures.hpp"
#include "posterior.hpp"
#include "py_sampler.hpp"
#include "replicates.hpp"

namespace pdp {

/// Which Gaussian limit a replicate set is compared against.
///   PosteriorBvm         sqrt(n)(P^(n) - E P^(n)) given data
///   PitmanYorLargeN      sqrt(n)(P_{a, theta + n a} - H)
///   DirichletLargeTheta  sqrt(theta)(P_{0,theta} - H)
enum class LimitKind { PosteriorBvm, PitmanYorLargeN, DirichletLargeTheta };

std::string to_string(LimitKind kind);

struct GaussianLimit {
  std::vector<FunctionSpec> labels;
  std::vector<double> covariance;  // row-major, labels.size() squared
  LimitKind kind;

  std::size_t dim() const { return labels.size(); }
  double cov(std::size_t i, std::size_t j) const { return covariance[i * dim() + j]; }
};

/// Covariance Q(fg) - Q(f)Q(g) of the Q-Brownian bridge.
double bridge_covariance(const Measure& q, const FunctionSpec& f, const FunctionSpec& g);

/// p0 is required for PosteriorBvm (pass the realized empirical measure to
/// condition on data) and ignored otherwise.
GaussianLimit gaussian_limit(LimitKind kind, double alpha, const BaseMeasure& base,
                             const std::vector<FunctionSpec>& functions,
                             const Measure* p0 = nullptr);

struct Thresholds {
  double p_min = 0.001;
  double cov_tol = 0.15;
  double var_tol = 0.10;
  double se_multiplier = 4.0;
  double bound_se_multiplier = 3.0;
  double consistency_tol = 0.05;
  double discrete_tol = 0.02;
  double inconsistency_gap = 0.1;
};

struct FunctionReport {
  std::string label;
  double ks_statistic;
  double p_value;
  double empirical_variance;
  double theoretical_variance;
  double relative_error;
  double covariance_error;  // max relative error over this function's covariance row
  bool pass;
};

struct TestReport {
  std::vector<FunctionReport> functions;
  double covariance_max_relative_error;
  double p_min;
  double cov_tol;
  bool pass;
};

/// Entries whose theoretical magnitude is at most this are left out of the
/// relative covariance comparison.
inline constexpr double kCovarianceFloor = 1e-3;

TestReport normality_test(const ReplicateSet& reps, const GaussianLimit& limit,
                          const Thresholds& thresholds);

/// Sample covariance matrix of the replicate columns, row-major.
std::vector<double> empirical_covariance(const ReplicateSet& reps);

enum class Route { Direct, Composition };

/// Rows sqrt(n)(P(f) - H(f)) with P ~ P_{a, theta + n a}, drawn either by
/// stick-breaking at the shifted parameters or by the gamma composition.
ReplicateSet centered_replicates_pd(double alpha, double theta, std::size_t n,
                                    const BaseMeasure& base,
                                    const std::vector<FunctionSpec>& functions,
                                    std::size_t replicates, const TruncationPolicy& trunc,
                                    Route route, std::uint64_t seed, unsigned workers = 1,
                                    TruncationStats* stats = nullptr);

/// Rows sqrt(n kappa)(P(f) - H(f)) with P a Dirichlet process of total mass
/// n kappa; Composition uses the n-fold gamma decomposition.
ReplicateSet centered_replicates_dirichlet(double kappa, std::size_t n, const BaseMeasure& base,
                                           const std::vector<FunctionSpec>& functions,
                                           std::size_t replicates, const TruncationPolicy& trunc,
                                           Route route, std::uint64_t seed, unsigned workers = 1,
                                           TruncationStats* stats = nullptr);

struct ConsistencyPoint {
  std::size_t n;
  double distance_to_target;
  double distance_to_truth;
};

/// For each n, one dataset of size n from truth (stream {seed, index}); the
/// posterior-mean cells are compared with the limit target (alpha H + (1 -
/// alpha) truth for continuous truth, truth itself for finite support) and with truth.
std::vector<ConsistencyPoint> consistency_curve(const PYParams& params, const BaseMeasure& base,
                                                const BaseMeasure& truth,
                                                const CellPartition& partition,
                                                const std::vector<std::size_t>& n_list,
                                                std::uint64_t seed);

std::vector<double> consistency_target(const PYParams& params, const BaseMeasure& base,
                                       const BaseMeasure& truth, const CellPartition& partition);

struct PriorConcentrationPoint {
  std::size_t n_p;
  double effective_theta;
  double estimate;
  double std_error;
  double bound;
};

/// E|P - H|_A^2 under the prior at (alpha, theta + n_p alpha), for each n_p.
std::vector<PriorConcentrationPoint> prior_concentration_check(
    double alpha, double theta, const std::vector<std::size_t>& n_p_values,
    const BaseMeasure& base, const CellPartition& partition, std::size_t replicates,
    const TruncationPolicy& trunc, std::uint64_t seed, unsigned workers = 1,
    TruncationStats* stats = nullptr);

}  // namespace pdp
