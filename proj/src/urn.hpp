#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "measures.hpp"
#include "py_sampler.hpp"
#include "rng.hpp"

namespace pdp {

struct Block {
  double location;
  std::size_t count;
};

/// Distinct values and multiplicities, in first-appearance order.
struct PartitionSummary {
  std::size_t n = 0;
  std::vector<Block> blocks;

  std::size_t distinct() const { return blocks.size(); }
};

PartitionSummary summarize(std::span<const double> data);

struct PredictiveWeights {
  double new_weight;
  std::vector<double> block_weights;
};

PredictiveWeights predictive_weights(const PartitionSummary& summary, const PYParams& params);

struct UrnDraw {
  double value;
  PartitionSummary summary;
};

UrnDraw urn_draw(const PartitionSummary& summary, const PYParams& params, const BaseMeasure& base,
                 RandomStream& stream);

struct UrnSequence {
  std::vector<double> values;
  PartitionSummary summary;
};

UrnSequence urn_sequence(const PYParams& params, const BaseMeasure& base, std::size_t n,
                         RandomStream& stream);

/// Atoms Y_j with weights (e_j - alpha) / (n - n(p) alpha).
AtomicMeasure ftilde(const PartitionSummary& summary, double alpha);

}  // namespace pdp
