#pragma once

#include <cmath>
#include <cstdint>

namespace resform {

// Counter-based generator: output i is a pure function of (key, i), so any
// replica stream can be reproduced or resumed without replaying the sequence.
// Streams are derived as (seed, stream) -> key; replica i of a Monte Carlo
// run uses stream i.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(derive_key(seed, stream)) {}

  std::uint64_t next_u64() {
    std::uint64_t z = key_ + kGamma * ++counter_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0,1), 53 significant bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0,1], safe as a log() argument.
  double uniform_pos() { return 1.0 - uniform(); }

  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u = uniform_pos();
    double v = uniform();
    double r = std::sqrt(-2.0 * std::log(u));
    cached_ = r * std::sin(6.283185307179586476925287 * v);
    have_cached_ = true;
    return r * std::cos(6.283185307179586476925287 * v);
  }

  // Pareto with P(w > u) = u^{-alpha} for u >= 1, via inverse CDF.
  double pareto(double alpha) {
    double u = uniform_pos();
    if (alpha == 0.5) {
      return 1.0 / (u * u);  // avoids pow in the hot path
    }
    return std::pow(u, -1.0 / alpha);
  }

  // Poisson by inversion for small means, PTRS-style not needed at desk scale;
  // mean values here stay below ~1e4 where the multiplication method is fine
  // for mean <= 30 and a normal-approximation-free sum split covers the rest.
  std::uint64_t poisson(double mean);

  std::uint64_t counter() const { return counter_; }
  void seek(std::uint64_t counter) { counter_ = counter; have_cached_ = false; }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
    z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ULL;
    return z ^ (z >> 33);
  }
  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
    return mix(mix(seed + 0x632be59bd9b4e019ULL) ^ (kGamma * (stream + 1)));
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

inline std::uint64_t CounterRng::poisson(double mean) {
  std::uint64_t total = 0;
  // Split large means so the exp() product below never underflows.
  while (mean > 30.0) {
    // Count of a rate-m/2 split plus the remainder is again Poisson(m).
    double half = mean * 0.5;
    // Gamma-free split: recurse on halves.
    total += poisson(half);
    mean -= half;
  }
  double limit = std::exp(-mean);
  double prod = uniform_pos();
  std::uint64_t k = 0;
  while (prod > limit) {
    prod *= uniform_pos();
    ++k;
  }
  total += k;
  return total;
}

}  // namespace resform
