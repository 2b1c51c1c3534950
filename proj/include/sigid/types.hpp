#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace sigid {

using Complex = std::complex<double>;
using Samples = std::vector<Complex>;

/// Complex baseband capture. `center_freq_hz` is the RF frequency that
/// baseband 0 Hz corresponds to.
struct IqRecording {
  Samples samples;
  double sample_rate_hz = 1.0;
  double center_freq_hz = 0.0;
  std::string description;

  std::size_t size() const noexcept { return samples.size(); }
  double duration_s() const noexcept {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

/// Uniform sample axis: position(i) = start + i * step. The unit depends on
/// the producer (Hz for spectra, seconds for envelopes, lags for correlations).
struct Axis {
  double start = 0.0;
  double step = 1.0;

  double at(double index) const noexcept { return start + index * step; }
};

/// Linear power floor used for every dB conversion.
inline constexpr double kPowerFloor = 1e-30;

inline double to_db(double linear_power) noexcept {
  return 10.0 * std::log10(std::max(linear_power, kPowerFloor));
}

inline double from_db(double db) noexcept { return std::pow(10.0, db / 10.0); }

}  // namespace sigid
