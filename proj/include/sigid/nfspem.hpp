#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sigid/types.hpp"

namespace sigid::nfspem {

/// Equal-width quantization of a dB sequence into L levels.
struct LevelHistogram {
  std::size_t level_count = 0;
  double level_width = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
  std::vector<std::size_t> counts;  // counts[i] is level i + 1
  double k = 1.0;
  double sigma = 0.0;  // population standard deviation of the input

  std::size_t total() const;
};

struct NoiseFloorEstimate {
  std::size_t change_level = 1;  // i*, 1-based; levels 1..i* are noise
  double threshold_db = 0.0;     // upper boundary of level i*
  std::vector<double> cusum;     // S_1..S_L
  double mean_count = 0.0;
  bool low_confidence = false;  // maximum of the CUSUM is attained more than once
};

struct DetectedComponent {
  std::size_t start_index = 0;
  std::size_t end_index = 0;  // inclusive
  double center = 0.0;        // linear-power centroid, axis units
  double width = 0.0;         // (end - start + 1) * axis step
  double peak_value_db = 0.0;
  double mean_excess_db = 0.0;
};

struct Params {
  double k = 1.0;
  std::size_t min_width = 3;
  std::size_t merge_gap = 2;
};

/// Throws InsufficientDataError for fewer than two samples and
/// DegenerateSpectrumError for constant input.
LevelHistogram segment_levels(std::span<const double> samples_db, double k);

/// 1-based level of a value under the histogram's boundary rule.
std::size_t level_of(const LevelHistogram& hist, double value_db);

NoiseFloorEstimate cusum_change_point(const LevelHistogram& hist);

std::vector<DetectedComponent> extract_components(std::span<const double> samples_db,
                                                  const Axis& axis,
                                                  const NoiseFloorEstimate& estimate,
                                                  std::size_t min_width_bins,
                                                  std::size_t merge_gap_bins);

struct Detection {
  LevelHistogram histogram;
  NoiseFloorEstimate estimate;
  std::vector<DetectedComponent> components;
};

Detection nfspem_detect(std::span<const double> samples_db, const Axis& axis,
                        const Params& params = {});

}  // namespace sigid::nfspem
