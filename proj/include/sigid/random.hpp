#pragma once

#include <cstdint>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "sigid/types.hpp"

namespace sigid {

/// Mixes a base seed with stream identifiers (splitmix64 finalizer). Used to
/// give every channel / trial its own reproducible stream.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                          std::uint64_t substream = 0) noexcept;

/// Seeded generator with platform-stable distributions. Boost's distributions
/// are used instead of <random>'s, whose outputs are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  int bit() { return static_cast<int>(engine_() >> 63); }
  std::uint64_t next() { return engine_(); }

  std::size_t index(std::size_t n) {
    return boost::random::uniform_int_distribution<std::size_t>(0, n - 1)(
        engine_);
  }

  /// Circularly-symmetric complex Gaussian with E|z|^2 = power.
  Complex complex_normal(double power) {
    const double sd = std::sqrt(power / 2.0);
    const double re = normal();
    const double im = normal();
    return {sd * re, sd * im};
  }

 private:
  boost::random::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};
  boost::random::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace sigid
