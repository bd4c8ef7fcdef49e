#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace pdp {

struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// Philox4x32-10 block function. Exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Mixes a label into a master seed, giving each suite or configuration its
/// own family of replicate streams while keeping stream_index = replicate.
std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view label);

// Counter-based stream: the key is the master seed, the upper 64 counter bits
// are the stream index and the lower 64 count blocks. Two streams share no
// state, so replicate k produces the same numbers whatever else runs.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(SeedSpec seed);

  result_type operator()();
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  /// Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform();
  /// Standard normal (Marsaglia polar method).
  double normal();

  SeedSpec seed() const { return seed_; }

 private:
  void refill();

  SeedSpec seed_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int available_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

RandomStream make_stream(SeedSpec seed);

double draw_gamma(RandomStream& stream, double shape);
/// log of a gamma(shape, 1) variate; stays finite where the variate itself
/// would underflow (small shapes).
double draw_log_gamma(RandomStream& stream, double shape);

double draw_beta(RandomStream& stream, double a, double b);

/// A beta variate together with its complement, both computed from the same
/// gamma pair so that neither suffers cancellation.
struct BetaPair {
  double value;
  double complement;
};
BetaPair draw_beta_pair(RandomStream& stream, double a, double b);

std::vector<double> draw_dirichlet(RandomStream& stream, std::span<const double> params);

std::size_t draw_categorical(RandomStream& stream, std::span<const double> weights);

// Same as draw_categorical, for callers that already know the weights are
// valid and only approximately normalised (total is passed in).
std::size_t draw_index(RandomStream& stream, std::span<const double> weights, double total);

}  // namespace pdp
