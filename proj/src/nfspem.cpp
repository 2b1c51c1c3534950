#include "sigid/nfspem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sigid/error.hpp"

namespace sigid::nfspem {

std::size_t LevelHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

LevelHistogram segment_levels(std::span<const double> samples, double k) {
  if (samples.size() < 2) throw InsufficientDataError("segment_levels: need at least 2 samples");
  if (!(k > 0.0 && k <= 1.0)) throw ParameterError("segment_levels: k must be in (0, 1]");
  for (double v : samples)
    if (!std::isfinite(v)) throw ParameterError("segment_levels: non-finite sample");

  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double var = 0.0;
  for (double v : samples) var += (v - mean) * (v - mean);
  const double sigma = std::sqrt(var / n);
  // Spreads at rounding level (a unit tone's |x|^2, say) count as constant.
  const double scale = std::max({1.0, std::abs(*lo), std::abs(*hi)});
  if (!(sigma > 0.0) || !(*hi - *lo > 1e-9 * scale))
    throw DegenerateSpectrumError("segment_levels: constant input has no level structure");

  LevelHistogram h;
  h.k = k;
  h.sigma = sigma;
  h.y_min = *lo;
  h.y_max = *hi;
  h.level_count = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::ceil((h.y_max - h.y_min) / (k * sigma))));
  h.level_width = (h.y_max - h.y_min) / static_cast<double>(h.level_count);
  h.counts.assign(h.level_count, 0);
  for (double v : samples) ++h.counts[level_of(h, v) - 1];
  return h;
}

std::size_t level_of(const LevelHistogram& h, double v) {
  // Relative position in [0, L]; a value on a boundary j * width lands in level j.
  const double pos = (v - h.y_min) / (h.y_max - h.y_min) * static_cast<double>(h.level_count);
  const auto level = static_cast<long long>(std::ceil(pos));
  return static_cast<std::size_t>(std::clamp<long long>(level, 1, static_cast<long long>(h.level_count)));
}

NoiseFloorEstimate cusum_change_point(const LevelHistogram& h) {
  if (h.level_count < 2 || h.counts.size() != h.level_count)
    throw ParameterError("cusum_change_point: malformed histogram");
  NoiseFloorEstimate e;
  const double levels = static_cast<double>(h.level_count);
  const double total = static_cast<double>(h.total());
  e.mean_count = total / levels;
  e.cusum.resize(h.level_count);
  // S_i = prefix_i - i * N / L, formed from integers so S_L is exactly zero.
  double prefix = 0.0;
  for (std::size_t i = 0; i < h.level_count; ++i) {
    prefix += static_cast<double>(h.counts[i]);
    e.cusum[i] = (levels * prefix - static_cast<double>(i + 1) * total) / levels;
  }
  const auto best = std::max_element(e.cusum.begin(), e.cusum.end());
  e.change_level = static_cast<std::size_t>(best - e.cusum.begin()) + 1;
  e.low_confidence = std::count(e.cusum.begin(), e.cusum.end(), *best) > 1;
  e.threshold_db = h.y_min + static_cast<double>(e.change_level) * h.level_width;
  return e;
}

std::vector<DetectedComponent> extract_components(std::span<const double> samples,
                                                  const Axis& axis,
                                                  const NoiseFloorEstimate& estimate,
                                                  std::size_t min_width, std::size_t merge_gap) {
  struct Run {
    std::size_t start;
    std::size_t end;
  };
  std::vector<Run> runs;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(samples[i] > estimate.threshold_db)) continue;
    if (!runs.empty() && runs.back().end + 1 == i)
      runs.back().end = i;
    else
      runs.push_back({i, i});
  }

  std::vector<Run> merged;
  for (const auto& r : runs) {
    if (!merged.empty() && r.start - merged.back().end - 1 <= merge_gap)
      merged.back().end = r.end;
    else
      merged.push_back(r);
  }

  std::vector<DetectedComponent> out;
  for (const auto& r : merged) {
    const std::size_t len = r.end - r.start + 1;
    if (len < std::max<std::size_t>(min_width, 1)) continue;
    DetectedComponent c;
    c.start_index = r.start;
    c.end_index = r.end;
    c.width = static_cast<double>(len) * axis.step;
    c.peak_value_db = samples[r.start];
    double weight = 0.0;
    double moment = 0.0;
    double excess = 0.0;
    for (std::size_t i = r.start; i <= r.end; ++i) {
      const double p = from_db(samples[i]);
      weight += p;
      moment += p * axis.at(static_cast<double>(i));
      excess += samples[i] - estimate.threshold_db;
      c.peak_value_db = std::max(c.peak_value_db, samples[i]);
    }
    c.center = weight > 0.0 ? moment / weight
                            : axis.at(0.5 * static_cast<double>(r.start + r.end));
    c.mean_excess_db = excess / static_cast<double>(len);
    out.push_back(c);
  }
  return out;
}

Detection nfspem_detect(std::span<const double> samples, const Axis& axis, const Params& params) {
  Detection d;
  d.histogram = segment_levels(samples, params.k);
  d.estimate = cusum_change_point(d.histogram);
  d.components = extract_components(samples, axis, d.estimate, params.min_width, params.merge_gap);
  return d;
}

}  // namespace sigid::nfspem
