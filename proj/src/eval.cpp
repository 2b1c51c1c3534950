#include "sigid/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <mutex>
#include <thread>

#include "sigid/error.hpp"
#include "sigid/random.hpp"

namespace sigid::eval {

wavegen::ScenarioSpec trial_scenario(double snr_db, double occupancy, std::size_t fft_size, std::uint64_t seed,
                                     const TrialOptions& opt) {
  if (!(occupancy >= 0.0 && occupancy <= 1.0)) throw ParameterError("occupancy must be in [0, 1]");
  if (opt.channel_count < 1) throw ParameterError("channel_count must be >= 1");
  wavegen::ScenarioSpec s;
  s.sample_rate_hz = 1e6;
  s.duration_s = static_cast<double>(opt.segments * fft_size) / s.sample_rate_hz;
  s.noise_power_dbw = 0.0;
  s.seed = seed;
  s.mask_fft_size = fft_size;

  const double fs = s.sample_rate_hz;
  const double step = fs / static_cast<double>(fft_size);
  const auto occupied = static_cast<std::size_t>(std::llround(occupancy * static_cast<double>(fft_size)));
  if (occupied == 0) return s;
  const std::size_t channels = occupied == fft_size ? 1 : std::min(opt.channel_count, occupied);
  const std::size_t free_bins = fft_size - occupied;

  // Layout: gap, channel, gap, channel, ... with widths and gaps as equal as
  // integer bins allow.
  std::size_t bin = 0;
  for (std::size_t c = 0; c < channels; ++c) {
    bin += free_bins / channels + (c < free_bins % channels ? 1 : 0);
    const std::size_t width = occupied / channels + (c < occupied % channels ? 1 : 0);
    const double first = -fs / 2.0 + static_cast<double>(bin) * step;
    const double last = first + static_cast<double>(width - 1) * step;
    wavegen::ChannelSpec ch;
    ch.kind = wavegen::ChannelKind::RectSpectrum;
    ch.snr_db = snr_db;
    ch.block_len = static_cast<int>(fft_size);
    const double low = std::max(-fs / 2.0, first - 0.25 * step);
    const double high = last + 0.5 * step;
    ch.center_freq_hz = 0.5 * (low + high);
    ch.bandwidth_hz = high - low;
    s.channels.push_back(ch);
    bin += width;
  }
  return s;
}

TrialResult run_trial(double snr_db, double occupancy, std::size_t fft_size, std::uint64_t seed,
                      const TrialOptions& opt) {
  const auto spec = trial_scenario(snr_db, occupancy, fft_size, seed, opt);
  const auto scenario = wavegen::compose_scenario(spec);
  const auto psd = dsp::welch_psd(scenario.recording, fft_size, opt.window, opt.overlap);
  const auto det = nfspem::nfspem_detect(psd.values_db, psd.freq_axis, opt.nfspem);

  std::vector<bool> label(fft_size, false);
  for (const auto& c : det.components)
    for (std::size_t j = c.start_index; j <= c.end_index; ++j) label[j] = true;
  const auto& truth = scenario.truth.occupancy_mask;
  std::size_t correct = 0;
  for (std::size_t j = 0; j < fft_size; ++j) correct += label[j] == truth[j] ? 1 : 0;

  TrialResult r;
  r.accuracy = static_cast<double>(correct) / static_cast<double>(fft_size);
  r.degenerate = std::all_of(truth.begin(), truth.end(), [](bool b) { return b; });
  return r;
}

std::pair<double, double> bootstrap_ci(const std::vector<double>& values, std::size_t resamples, std::uint64_t seed,
                                       double level) {
  if (values.empty()) throw EmptyInputError("bootstrap_ci: no values");
  if (resamples < 1) throw ParameterError("bootstrap_ci: resamples must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw ParameterError("bootstrap_ci: level must be in (0, 1)");
  Rng rng(seed);
  std::vector<double> means(resamples);
  const std::size_t n = values.size();
  for (auto& m : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += values[rng.index(n)];
    m = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double tail = 0.5 * (1.0 - level);
  const double last = static_cast<double>(resamples - 1);
  const auto lo = static_cast<std::size_t>(std::floor(tail * last));
  const auto hi = static_cast<std::size_t>(std::ceil((1.0 - tail) * last));
  return {means[lo], means[hi]};
}

std::vector<ConfidenceCell> confidence_grid(const std::vector<double>& snrs, const std::vector<double>& occs,
                                            std::size_t trials, std::size_t resamples, std::uint64_t seed,
                                            const GridOptions& opt) {
  if (trials < 100) throw ParameterError("confidence_grid: trials must be >= 100");
  if (resamples < 1000) throw ParameterError("confidence_grid: resamples must be >= 1000");
  if (snrs.empty() || occs.empty()) throw ParameterError("confidence_grid: empty axis");

  const std::size_t cells = snrs.size() * occs.size();
  const std::size_t jobs = cells * trials;
  std::vector<TrialResult> results(jobs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      const std::size_t cell = j / trials;
      const std::size_t trial = j % trials;
      const double snr = snrs[cell / occs.size()];
      const double occ = occs[cell % occs.size()];
      try {
        results[j] = run_trial(snr, occ, opt.fft_size, derive_seed(seed, cell + 1, trial), opt.trial);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, opt.workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<ConfidenceCell> out;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    std::vector<double> acc(trials);
    bool degenerate = false;
    for (std::size_t t = 0; t < trials; ++t) {
      acc[t] = results[cell * trials + t].accuracy;
      degenerate = degenerate || results[cell * trials + t].degenerate;
    }
    ConfidenceCell c;
    c.snr_db = snrs[cell / occs.size()];
    c.occupancy = occs[cell % occs.size()];
    c.trials = trials;
    c.confidence_mean = std::accumulate(acc.begin(), acc.end(), 0.0) / static_cast<double>(trials);
    const auto [lo, hi] = bootstrap_ci(acc, resamples, derive_seed(seed, cell + 1, 0xB0075742ULL), opt.ci_level);
    c.ci_low = std::min(lo, c.confidence_mean);
    c.ci_high = std::max(hi, c.confidence_mean);
    c.degenerate = degenerate;
    out.push_back(c);
  }
  return out;
}

void write_csv(std::ostream& out, const std::vector<ConfidenceCell>& cells) {
  out << "snr_db,occupancy,trials,confidence_mean,ci_low,ci_high\n";
  char line[256];
  for (const auto& c : cells) {
    std::snprintf(line, sizeof line, "%.6f,%.6f,%zu,%.6f,%.6f,%.6f\n", c.snr_db, c.occupancy, c.trials,
                  c.confidence_mean, c.ci_low, c.ci_high);
    out << line;
  }
}

}  // namespace sigid::eval
