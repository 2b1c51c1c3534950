#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sigid/dsp.hpp"
#include "sigid/nfspem.hpp"
#include "sigid/types.hpp"

namespace sigid::sensing {

enum class Method { Energy, Cyclo, Autocorr, MatchedFilter, TemplateMatch };

std::string to_string(Method m);
Method method_from_string(const std::string& name);

struct Evidence {
  Method method = Method::Energy;
  std::vector<nfspem::DetectedComponent> peaks;
  Axis axis;  // axis the peaks live on
  double statistic = 0.0;
  double threshold = 0.0;
  bool detected = false;
  bool low_confidence = false;  // NFSPEM CUSUM maximum was tied
  bool flat_input = false;      // template matching hit a zero-variance shape
  bool truncated = false;       // lag range clipped to the recording
  std::vector<double> scores;   // TemplateMatch: correlation score per peak
  std::optional<int> useful_length;  // Autocorr
  std::optional<int> cp_length;      // Autocorr
};

/// Sum of |x|^2 against the Gaussian approximation of its noise-only
/// distribution. Needs at least 100 samples.
Evidence energy_detect(const IqRecording& iq, double noise_var, double pfa);

/// Inclusive lag interval, in samples.
struct TauRange {
  std::size_t first = 0;
  std::size_t last = 0;
};

/// Default lags 0 .. min(256, T/4).
TauRange default_tau_range(std::size_t sample_count);

struct LagValues {
  std::vector<Complex> values;  // one per lag, starting at range.first
  TauRange range;               // lags actually evaluated
  bool truncated = false;
};

/// (1/T) sum_t x(t) conj(x(t + tau)).
LagValues sample_autocorrelation(const IqRecording& iq, TauRange range);

/// (1/T) sum_t x(t) conj(x(t + tau)) exp(-j 2 pi alpha t / fs). Identical to
/// sample_autocorrelation at alpha = 0.
LagValues cyclic_autocorrelation(const IqRecording& iq, double alpha_hz, TauRange range);

struct CyclicProfile {
  std::vector<double> alpha_grid;    // Hz, uniform and strictly increasing
  std::vector<double> magnitude_db;  // 10 log10 of max over tau of |R|
  TauRange tau_range;

  Axis axis() const;
};

/// Uniform grid lo, lo + step, ... <= hi.
std::vector<double> make_alpha_grid(double lo_hz, double hi_hz, double step_hz);

/// Each grid point takes the largest |R| over the lags and over the FFT cyclic
/// bins within half a grid step of it.
CyclicProfile scan_cyclic(const IqRecording& iq, const std::vector<double>& alpha_grid,
                          TauRange tau_range);

/// NFSPEM peak extraction on a cyclic profile.
Evidence cyclic_evidence(const CyclicProfile& profile, const nfspem::Params& params);

struct CpParams {
  std::size_t lag_first = 1;
  std::size_t lag_last = 512;
  double k = 1.0;
  double pfa = 1e-3;
};

/// Finds a repeated segment (cyclic prefix) from the lag autocorrelation.
Evidence cp_autocorr_detect(const IqRecording& iq, const CpParams& params = {});

/// Normalized correlation |<x, h>|^2 / (|h|^2 noise) against a per-position
/// Bonferroni threshold; peaks are non-overlapping start positions.
Evidence matched_filter_detect(const IqRecording& iq, std::span<const Complex> templ, double pfa);

/// Pearson correlation of the dB template against each slice of the PSD.
Evidence spectral_template_match(const dsp::PowerSpectrum& psd, std::span<const double> template_db,
                                 double min_score);

}  // namespace sigid::sensing
