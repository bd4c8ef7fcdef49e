#include "posterior.hpp"

#include <cmath>

#include "errors.hpp"

namespace pdp {

namespace {

AtomicMeasure mixture(double r, double r_complement, const AtomicMeasure& a, const AtomicMeasure& b) {
  std::vector<Atom> atoms;
  atoms.reserve(a.size() + b.size());
  for (const auto& x : a.atoms())
    if (r * x.weight > 0.0) atoms.push_back({x.location, r * x.weight});
  for (const auto& x : b.atoms())
    if (r_complement * x.weight > 0.0) atoms.push_back({x.location, r_complement * x.weight});
  return AtomicMeasure(std::move(atoms));
}

struct Pieces {
  BetaPair r;
  AtomicMeasure dn;
  AtomicMeasure continuous;
};

Pieces draw_pieces(const PartitionSummary& summary, const PYParams& params, const BaseMeasure& base,
                   const TruncationPolicy& trunc, RandomStream& stream, TruncationStats* stats) {
  params.validate();
  if (summary.n == 0) {
    throw DomainError("posterior needs n >= 1; sample the prior with stick_breaking_sample");
  }
  const double np = static_cast<double>(summary.distinct());
  const double n = static_cast<double>(summary.n);
  const double shifted = params.theta + np * params.alpha;
  const auto r = draw_beta_pair(stream, shifted, n - np * params.alpha);
  std::vector<double> dir(summary.blocks.size());
  for (std::size_t j = 0; j < dir.size(); ++j) {
    dir[j] = static_cast<double>(summary.blocks[j].count) - params.alpha;
  }
  const auto w = draw_dirichlet(stream, dir);
  std::vector<Atom> atoms;
  atoms.reserve(w.size());
  for (std::size_t j = 0; j < w.size(); ++j)
    if (w[j] > 0.0) atoms.push_back({summary.blocks[j].location, w[j]});
  AtomicMeasure dn(std::move(atoms));
  AtomicMeasure cont = stick_breaking_sample({params.alpha, shifted}, base, trunc, stream, stats);
  return {r, std::move(dn), std::move(cont)};
}

}  // namespace

PosteriorDraw posterior_sample(const PartitionSummary& summary, const PYParams& params,
                               const BaseMeasure& base, const TruncationPolicy& trunc,
                               RandomStream& stream, TruncationStats* stats) {
  auto p = draw_pieces(summary, params, base, trunc, stream, stats);
  AtomicMeasure combined = mixture(p.r.value, p.r.complement, p.continuous, p.dn);
  return {p.r.value, p.r.complement, std::move(p.dn), std::move(p.continuous), std::move(combined)};
}

std::vector<double> posterior_mean(const PartitionSummary& summary, const PYParams& params,
                                   const BaseMeasure& base, const CellPartition& partition) {
  const auto pw = predictive_weights(summary, params);
  auto out = cell_probs(base, partition);
  for (double& x : out) x *= pw.new_weight;
  for (std::size_t j = 0; j < summary.blocks.size(); ++j) {
    out[partition.cell_of(summary.blocks[j].location)] += pw.block_weights[j];
  }
  if (partition.cells() == 1) out[0] = 1.0;
  return out;
}

double posterior_mean_of(const PartitionSummary& summary, const PYParams& params,
                         const BaseMeasure& base, const FunctionSpec& f) {
  const auto pw = predictive_weights(summary, params);
  double total = pw.new_weight * integrate(base, f);
  for (std::size_t j = 0; j < summary.blocks.size(); ++j) {
    total += pw.block_weights[j] * f(summary.blocks[j].location);
  }
  return total;
}

McEstimate concentration_statistic(const PartitionSummary& summary, const PYParams& params,
                                   const BaseMeasure& base, const CellPartition& partition,
                                   std::size_t replicates, const TruncationPolicy& trunc,
                                   std::uint64_t seed, unsigned workers, TruncationStats* stats) {
  if (replicates < 100) throw ParameterError("concentration statistic needs M >= 100");
  const auto mean = posterior_mean(summary, params, base, partition);
  std::vector<double> values(replicates);
  std::vector<TruncationStats> per(replicates);
  parallel_for(replicates, workers, [&](std::size_t m) {
    RandomStream stream({seed, m});
    const auto p = draw_pieces(summary, params, base, trunc, stream, &per[m]);
    const auto c = cell_probs(p.continuous, partition);
    const auto d = cell_probs(p.dn, partition);
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double cell = p.r.value * c[i] + p.r.complement * d[i];
      const double diff = cell - mean[i];
      s += diff * diff;
    }
    values[m] = s;
  });
  double sum = 0.0;
  for (const double v : values) sum += v;
  const double avg = sum / static_cast<double>(replicates);
  double ss = 0.0;
  for (const double v : values) ss += (v - avg) * (v - avg);
  const double var = ss / static_cast<double>(replicates - 1);
  if (stats)
    for (const auto& s : per) stats->merge(s);
  return {avg, std::sqrt(var / static_cast<double>(replicates))};
}

ReplicateSet bvm_replicates(std::span<const double> data, const PYParams& params,
                            const BaseMeasure& base, const std::vector<FunctionSpec>& functions,
                            std::size_t replicates, const TruncationPolicy& trunc,
                            std::uint64_t seed, unsigned workers, TruncationStats* stats) {
  if (data.empty()) throw DomainError("posterior replicates need nonempty data");
  params.validate();
  const auto summary = summarize(data);
  const double root_n = std::sqrt(static_cast<double>(summary.n));
  std::vector<double> centre(functions.size());
  for (std::size_t j = 0; j < functions.size(); ++j) {
    centre[j] = posterior_mean_of(summary, params, base, functions[j]);
  }
  std::vector<TruncationStats> per(replicates);
  auto out = generate_replicates(
      functions, replicates,
      {"posterior", params.alpha, params.theta, summary.n, seed}, workers,
      [&](RandomStream& stream, std::span<double> row, std::size_t m) {
        const auto p = draw_pieces(summary, params, base, trunc, stream, &per[m]);
        std::vector<double> dn_part(functions.size());
        integrate_all(p.continuous, functions, row);
        integrate_all(p.dn, functions, dn_part);
        for (std::size_t j = 0; j < functions.size(); ++j) {
          const double v = p.r.value * row[j] + p.r.complement * dn_part[j];
          row[j] = root_n * (v - centre[j]);
        }
      });
  if (stats)
    for (const auto& s : per) stats->merge(s);
  return out;
}

}  // namespace pdp
