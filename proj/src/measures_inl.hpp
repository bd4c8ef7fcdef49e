#pragma once

#include "errors.hpp"

namespace pdp {

template <class P, class Q>
std::vector<double> mix(double w, const P& p, const Q& q, const CellPartition& partition) {
  if (!(w >= 0.0 && w <= 1.0)) {
    throw ParameterError("mixing weight must lie in [0, 1], got " + std::to_string(w));
  }
  auto out = cell_probs(p, partition);
  const auto other = cell_probs(q, partition);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = w * out[i] + (1.0 - w) * other[i];
  return out;
}

}  // namespace pdp
