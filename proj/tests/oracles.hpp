#pragma once

// Independent reference computations used as test oracles. Deliberately
// naive: exhaustive loops and direct sums, no shared code with the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace oracle {

using cd = std::complex<double>;

struct Cusum {
  std::size_t change_level = 0;  // 1-based
  std::vector<double> s;
};

// Exhaustive: every prefix sum recomputed from scratch; argmax with the
// smallest index taken on ties (exact integer comparison L*prefix - i*N).
inline Cusum cusum(const std::vector<std::size_t>& counts) {
  const long long levels = static_cast<long long>(counts.size());
  long long total = 0;
  for (auto c : counts) total += static_cast<long long>(c);
  Cusum out;
  long long best = 0;
  for (long long i = 1; i <= levels; ++i) {
    long long prefix = 0;
    for (long long j = 0; j < i; ++j) prefix += static_cast<long long>(counts[static_cast<std::size_t>(j)]);
    const long long scaled = levels * prefix - i * total;
    out.s.push_back(static_cast<double>(scaled) / static_cast<double>(levels));
    if (i == 1 || scaled > best) {
      best = scaled;
      out.change_level = static_cast<std::size_t>(i);
    }
  }
  return out;
}

// Level by scanning boundaries: the first j with v <= min + j * width.
inline std::size_t level_by_scan(double v, double lo, double hi, std::size_t levels) {
  const double width = (hi - lo) / static_cast<double>(levels);
  for (std::size_t j = 1; j < levels; ++j)
    if (v <= lo + static_cast<double>(j) * width) return j;
  return levels;
}

inline double population_sigma(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(v.size()));
}

inline std::vector<cd> dft(const std::vector<cd>& x) {
  const std::size_t n = x.size();
  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t t = 0; t < n; ++t)
      out[k] += x[t] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * t % n) /
                                           static_cast<double>(n));
  return out;
}

// |H(f)| of real taps, evaluated directly.
inline double fir_gain_db(const std::vector<double>& taps, double f, double fs) {
  cd acc{};
  for (std::size_t n = 0; n < taps.size(); ++n)
    acc += taps[n] * std::polar(1.0, -2.0 * std::numbers::pi * f * static_cast<double>(n) / fs);
  return 20.0 * std::log10(std::max(std::abs(acc), 1e-300));
}

inline cd autocorr(const std::vector<cd>& x, std::size_t tau) {
  cd acc{};
  for (std::size_t t = 0; t + tau < x.size(); ++t) acc += x[t] * std::conj(x[t + tau]);
  return acc / static_cast<double>(x.size());
}

inline cd caf(const std::vector<cd>& x, double alpha, double fs, std::size_t tau) {
  cd acc{};
  for (std::size_t t = 0; t + tau < x.size(); ++t)
    acc += x[t] * std::conj(x[t + tau]) *
           std::polar(1.0, -2.0 * std::numbers::pi * alpha * static_cast<double>(t) / fs);
  return acc / static_cast<double>(x.size());
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace oracle
