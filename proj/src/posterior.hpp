#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "measures.hpp"
#include "py_sampler.hpp"
#include "replicates.hpp"
#include "rng.hpp"
#include "urn.hpp"

namespace pdp {

/// One draw r * continuous_part + (1 - r) * dn from the posterior given a summary.
struct PosteriorDraw {
  double r;
  double r_complement;
  AtomicMeasure dn;
  AtomicMeasure continuous_part;
  AtomicMeasure combined;
};

PosteriorDraw posterior_sample(const PartitionSummary& summary, const PYParams& params,
                               const BaseMeasure& base, const TruncationPolicy& trunc,
                               RandomStream& stream, TruncationStats* stats = nullptr);

/// Cell probabilities of the predictive law.
std::vector<double> posterior_mean(const PartitionSummary& summary, const PYParams& params,
                                   const BaseMeasure& base, const CellPartition& partition);

/// Predictive expectation of f.
double posterior_mean_of(const PartitionSummary& summary, const PYParams& params,
                         const BaseMeasure& base, const FunctionSpec& f);

struct McEstimate {
  double estimate;
  double std_error;
};

/// Monte Carlo E|P^(n) - E P^(n)|_A^2 over M posterior draws; draw m uses stream {seed, m}.
McEstimate concentration_statistic(const PartitionSummary& summary, const PYParams& params,
                                   const BaseMeasure& base, const CellPartition& partition,
                                   std::size_t replicates, const TruncationPolicy& trunc,
                                   std::uint64_t seed, unsigned workers = 1,
                                   TruncationStats* stats = nullptr);

/// Rows sqrt(n) (P_m(f) - E[P(f) | data]) for independent posterior draws P_m.
ReplicateSet bvm_replicates(std::span<const double> data, const PYParams& params,
                            const BaseMeasure& base, const std::vector<FunctionSpec>& functions,
                            std::size_t replicates, const TruncationPolicy& trunc,
                            std::uint64_t seed, unsigned workers = 1,
                            TruncationStats* stats = nullptr);

}  // namespace pdp
