#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <vector>

#include "sigid/dsp.hpp"
#include "sigid/nfspem.hpp"
#include "sigid/wavegen.hpp"

namespace sigid::eval {

struct TrialOptions {
  std::size_t segments = 512;  // recording length = segments * fft_size
  dsp::Window window = dsp::Window::Rect;
  double overlap = 0.0;
  nfspem::Params nfspem{0.3, 3, 0};  // no merging: isolated noise runs stay below min_width
  std::size_t channel_count = 4;
};

struct TrialResult {
  double accuracy = 0.0;
  bool degenerate = false;  // full-band occupancy: a single channel, no noise-only bins
};

/// Rectangular-spectrum channels covering round(occupancy * fft_size) bins,
/// spread with equal gaps; full occupancy is one full-band channel.
wavegen::ScenarioSpec trial_scenario(double snr_db, double occupancy, std::size_t fft_size,
                                     std::uint64_t seed, const TrialOptions& options = {});

/// Fraction of PSD bins whose NFSPEM label (inside a detected component or
/// not) agrees with the ground-truth mask.
TrialResult run_trial(double snr_db, double occupancy, std::size_t fft_size, std::uint64_t seed,
                      const TrialOptions& options = {});

struct ConfidenceCell {
  double snr_db = 0.0;
  double occupancy = 0.0;
  std::size_t trials = 0;
  double confidence_mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool degenerate = false;
};

struct GridOptions {
  std::size_t fft_size = 1024;
  TrialOptions trial{};
  std::size_t workers = 1;
  double ci_level = 0.95;
};

/// Per cell: mean accuracy over seeded trials and a percentile bootstrap
/// interval over resampled trial accuracies. Identical for any worker count.
std::vector<ConfidenceCell> confidence_grid(const std::vector<double>& snr_list,
                                            const std::vector<double>& occupancy_list, std::size_t trials,
                                            std::size_t resamples, std::uint64_t seed,
                                            const GridOptions& options = {});

/// Percentile bootstrap of the mean.
std::pair<double, double> bootstrap_ci(const std::vector<double>& values, std::size_t resamples,
                                       std::uint64_t seed, double level = 0.95);

void write_csv(std::ostream& out, const std::vector<ConfidenceCell>& cells);

}  // namespace sigid::eval
