#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "measures.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace pdp {

struct ReplicateMeta {
  std::string process;
  double alpha = 0.0;
  double theta = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

/// M x |labels| matrix of centered-process evaluations, stored row-major.
class ReplicateSet {
 public:
  ReplicateSet(std::vector<FunctionSpec> labels, std::size_t rows, ReplicateMeta meta)
      : labels_(std::move(labels)), rows_(rows), data_(rows * labels_.size()), meta_(std::move(meta)) {}

  std::span<const FunctionSpec> labels() const { return labels_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return labels_.size(); }
  const ReplicateMeta& meta() const { return meta_; }

  double at(std::size_t m, std::size_t j) const { return data_[m * cols() + j]; }
  std::span<double> row(std::size_t m) { return {data_.data() + m * cols(), cols()}; }
  std::span<const double> row(std::size_t m) const { return {data_.data() + m * cols(), cols()}; }
  std::vector<double> column(std::size_t j) const {
    std::vector<double> out(rows_);
    for (std::size_t m = 0; m < rows_; ++m) out[m] = at(m, j);
    return out;
  }

 private:
  std::vector<FunctionSpec> labels_;
  std::size_t rows_;
  std::vector<double> data_;
  ReplicateMeta meta_;
};

/// Fills row m from the stream {seed, m}, in parallel across rows. The row
/// index is passed along for callers keeping per-row side tables.
template <class RowFn>
ReplicateSet generate_replicates(std::vector<FunctionSpec> labels, std::size_t rows,
                                 ReplicateMeta meta, unsigned workers, RowFn&& fill) {
  ReplicateSet out(std::move(labels), rows, std::move(meta));
  const std::uint64_t seed = out.meta().seed;
  parallel_for(rows, workers, [&](std::size_t m) {
    RandomStream stream({seed, m});
    fill(stream, out.row(m), m);
  });
  return out;
}

}  // namespace pdp
