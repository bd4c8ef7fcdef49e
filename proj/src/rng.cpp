#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "errors.hpp"

namespace pdp {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ParameterError(std::string(name) + " must be a positive finite number, got " +
                         std::to_string(value));
  }
}

// Marsaglia-Tsang squeeze/rejection, exact for shape >= 1.
double gamma_at_least_one(RandomStream& s, double shape) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = s.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = s.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view label) {
  std::uint64_t h = 0xCBF29CE484222325ull;  // FNV-1a
  for (const char ch : label) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001B3ull;
  }
  return splitmix64(master_seed ^ splitmix64(h));
}

RandomStream::RandomStream(SeedSpec seed) : seed_(seed) {}

void RandomStream::refill() {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
      static_cast<std::uint32_t>(seed_.stream_index),
      static_cast<std::uint32_t>(seed_.stream_index >> 32)};
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_.master_seed),
                                            static_cast<std::uint32_t>(seed_.master_seed >> 32)};
  const auto out = philox4x32_10(ctr, key);
  buffer_[0] = static_cast<std::uint64_t>(out[0]) | (static_cast<std::uint64_t>(out[1]) << 32);
  buffer_[1] = static_cast<std::uint64_t>(out[2]) | (static_cast<std::uint64_t>(out[3]) << 32);
  ++block_;
  available_ = 2;
}

RandomStream::result_type RandomStream::operator()() {
  if (available_ == 0) refill();
  return buffer_[2 - available_--];
}

double RandomStream::uniform() {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u;
  double v;
  double s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  has_spare_ = true;
  return u * factor;
}

RandomStream make_stream(SeedSpec seed) { return RandomStream(seed); }

double draw_gamma(RandomStream& stream, double shape) {
  require_positive(shape, "gamma shape");
  if (shape >= 1.0) return gamma_at_least_one(stream, shape);
  // gamma(a) = gamma(a + 1) * U^(1/a)
  const double g = gamma_at_least_one(stream, shape + 1.0);
  return g * std::pow(stream.uniform(), 1.0 / shape);
}

double draw_log_gamma(RandomStream& stream, double shape) {
  require_positive(shape, "gamma shape");
  if (shape >= 1.0) return std::log(gamma_at_least_one(stream, shape));
  const double g = gamma_at_least_one(stream, shape + 1.0);
  return std::log(g) + std::log(stream.uniform()) / shape;
}

BetaPair draw_beta_pair(RandomStream& stream, double a, double b) {
  require_positive(a, "beta parameter a");
  require_positive(b, "beta parameter b");
  if (a >= 1.0 && b >= 1.0) {
    const double ga = gamma_at_least_one(stream, a);
    const double gb = gamma_at_least_one(stream, b);
    const double total = ga + gb;
    return {ga / total, gb / total};
  }
  const double la = draw_log_gamma(stream, a);
  if (b >= 1.0 && la > -700.0) {
    // Only the small-shape side risks underflow; keep the other one linear.
    const double ea = std::exp(la);
    const double gb = gamma_at_least_one(stream, b);
    const double total = ea + gb;
    return {ea / total, gb / total};
  }
  const double lb = draw_log_gamma(stream, b);
  const double m = std::max(la, lb);
  const double ea = std::exp(la - m);
  const double eb = std::exp(lb - m);
  const double total = ea + eb;
  return {ea / total, eb / total};
}

double draw_beta(RandomStream& stream, double a, double b) {
  return draw_beta_pair(stream, a, b).value;
}

std::vector<double> draw_dirichlet(RandomStream& stream, std::span<const double> params) {
  if (params.empty()) throw ParameterError("Dirichlet parameter vector must be nonempty");
  for (const double p : params) require_positive(p, "Dirichlet parameter");
  std::vector<double> out(params.size());
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < params.size(); ++i) {
    out[i] = draw_log_gamma(stream, params[i]);
    m = std::max(m, out[i]);
  }
  double total = 0.0;
  for (double& x : out) {
    x = std::exp(x - m);
    total += x;
  }
  for (double& x : out) x /= total;
  return out;
}

std::size_t draw_index(RandomStream& stream, std::span<const double> weights, double total) {
  const double u = stream.uniform() * total;
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) {
      cumulative += weights[i];
      last_positive = i;
      if (u < cumulative) return i;
    }
  }
  return last_positive;
}

std::size_t draw_categorical(RandomStream& stream, std::span<const double> weights) {
  if (weights.empty()) throw ParameterError("categorical weights must be nonempty");
  double total = 0.0;
  for (const double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ParameterError("categorical weights must be nonnegative and finite");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ParameterError("categorical weights must sum to 1 within 1e-12, got " +
                         std::to_string(total));
  }
  return draw_index(stream, weights, total);
}

}  // namespace pdp
