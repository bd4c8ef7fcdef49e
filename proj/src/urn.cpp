#include "urn.hpp"

#include <unordered_map>

#include "errors.hpp"

namespace pdp {

namespace {

// Adds one observation in place; returns the block index it landed in.
std::size_t add_value(PartitionSummary& s, std::unordered_map<double, std::size_t>& index,
                      double x) {
  ++s.n;
  auto [it, inserted] = index.try_emplace(x, s.blocks.size());
  if (inserted) {
    s.blocks.push_back({x, 1});
  } else {
    ++s.blocks[it->second].count;
  }
  return it->second;
}

// Draw from the prediction rule, mutating the summary in place.
double draw_into(PartitionSummary& s, std::unordered_map<double, std::size_t>& index,
                 const PYParams& params, const BaseMeasure& base, RandomStream& stream) {
  const double denom = params.theta + static_cast<double>(s.n);
  const double new_weight =
      s.n == 0 ? 1.0 : (params.theta + static_cast<double>(s.blocks.size()) * params.alpha) / denom;
  double u = stream.uniform();
  if (u >= new_weight) {
    // Walk blocks with weights (e_j - alpha) / (theta + n).
    u = (u - new_weight) * denom;
    std::size_t chosen = s.blocks.size() - 1;
    double acc = 0.0;
    for (std::size_t j = 0; j < s.blocks.size(); ++j) {
      acc += static_cast<double>(s.blocks[j].count) - params.alpha;
      if (u < acc) {
        chosen = j;
        break;
      }
    }
    ++s.n;
    ++s.blocks[chosen].count;
    return s.blocks[chosen].location;
  }
  // A fresh draw equal to an existing value is a probability-zero event for a
  // non-atomic base; add_value merges it if it ever happens.
  const double x = base.sample(stream);
  add_value(s, index, x);
  return x;
}

std::unordered_map<double, std::size_t> build_index(const PartitionSummary& s) {
  std::unordered_map<double, std::size_t> index;
  for (std::size_t j = 0; j < s.blocks.size(); ++j) index.emplace(s.blocks[j].location, j);
  return index;
}

}  // namespace

PartitionSummary summarize(std::span<const double> data) {
  PartitionSummary s;
  std::unordered_map<double, std::size_t> index;
  for (const double x : data) add_value(s, index, x);
  return s;
}

PredictiveWeights predictive_weights(const PartitionSummary& summary, const PYParams& params) {
  params.validate();
  PredictiveWeights out;
  if (summary.n == 0) {
    out.new_weight = 1.0;
    return out;
  }
  const double denom = params.theta + static_cast<double>(summary.n);
  out.new_weight = (params.theta + static_cast<double>(summary.distinct()) * params.alpha) / denom;
  out.block_weights.reserve(summary.blocks.size());
  for (const auto& b : summary.blocks) {
    out.block_weights.push_back((static_cast<double>(b.count) - params.alpha) / denom);
  }
  return out;
}

UrnDraw urn_draw(const PartitionSummary& summary, const PYParams& params, const BaseMeasure& base,
                 RandomStream& stream) {
  params.validate();
  if (base.is_atomic()) throw DomainError("urn needs a non-atomic base measure");
  UrnDraw out{0.0, summary};
  auto index = build_index(out.summary);
  out.value = draw_into(out.summary, index, params, base, stream);
  return out;
}

UrnSequence urn_sequence(const PYParams& params, const BaseMeasure& base, std::size_t n,
                         RandomStream& stream) {
  params.validate();
  if (base.is_atomic()) throw DomainError("urn needs a non-atomic base measure");
  UrnSequence out;
  out.values.reserve(n);
  std::unordered_map<double, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) {
    out.values.push_back(draw_into(out.summary, index, params, base, stream));
  }
  return out;
}

AtomicMeasure ftilde(const PartitionSummary& summary, double alpha) {
  if (summary.n == 0) throw DomainError("ftilde needs at least one observation");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ParameterError("ftilde needs 0 <= alpha < 1");
  const double denom =
      static_cast<double>(summary.n) - static_cast<double>(summary.distinct()) * alpha;
  std::vector<Atom> atoms;
  atoms.reserve(summary.blocks.size());
  for (const auto& b : summary.blocks) {
    atoms.push_back({b.location, (static_cast<double>(b.count) - alpha) / denom});
  }
  return AtomicMeasure(std::move(atoms));
}

}  // namespace pdp
