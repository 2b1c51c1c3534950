#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sigid/classify.hpp"
#include "sigid/dsp.hpp"
#include "sigid/nfspem.hpp"
#include "sigid/sensing.hpp"
#include "sigid/types.hpp"

namespace sigid::pipeline {

enum class BurstMode { Auto, On, Off };

std::string to_string(BurstMode m);
BurstMode burst_mode_from_string(const std::string& name);

struct CycloConfig {
  double grid_step_hz = 0.0;  // 0: one cyclic DFT bin, fs / T
  std::size_t tau_max = 256;  // further capped at T / 4
  nfspem::Params peaks{1.0, 1, 2};
  double min_peak_excess_db = 6.0;
  std::size_t max_carriers = 8;
};

struct PipelineConfig {
  std::size_t fft_size = 1024;
  dsp::Window window = dsp::Window::Hann;
  double overlap = 0.5;
  nfspem::Params wideband{};
  double guard_factor = 1.2;
  BurstMode burst_detection = BurstMode::Auto;
  std::size_t smooth_len = 64;
  double burst_k = 1.0;
  double burst_min_excess_db = 6.0;
  bool gate_bursts = true;    // zero the channel outside detected bursts before sensing
  bool no_channelize = false; // debug: skip mixing and bandpass filtering
  bool record_timing = false;
  bool parallel = false;
  std::string plan_path;
  CycloConfig cyclo{};
  double matched_pfa = 1e-3;
  sensing::CpParams autocorr{};
  double template_min_score = 0.9;
  double energy_pfa = 0.01;

  /// Throws ParameterError on out-of-range values.
  void validate() const;
};

struct BurstRecord {
  double start_s = 0.0;
  double duration_s = 0.0;
  double mean_power_db = 0.0;
};

struct BurstDetection {
  std::vector<BurstRecord> bursts;
  std::vector<nfspem::DetectedComponent> components;  // on the envelope's sample axis
  bool continuous = false;  // envelope without level structure
  bool silent = false;      // all-zero input
};

/// Power envelope -> NFSPEM on the sample axis. Runs whose median stays within
/// min_excess_db of the noise floor are dropped; edges sit at the half-power
/// crossing between floor and burst level.
BurstDetection detect_bursts(const IqRecording& channel, std::size_t smooth_len, double k = 1.0,
                             double min_excess_db = 6.0);

/// Zeroes samples outside the detected bursts; no-op when none were found.
void gate_to_bursts(IqRecording& channel, const BurstDetection& detection);

struct EvidenceSummary {
  std::string candidate;
  std::string method;
  double statistic = 0.0;
  double threshold = 0.0;
  bool detected = false;
  bool low_confidence = false;
  std::size_t peak_count = 0;
  bool rescan = false;  // produced by the widened cyclic search
  std::optional<int> useful_length;
  std::optional<int> cp_length;
};

struct ComponentReport {
  std::size_t index = 0;
  std::size_t start_bin = 0;
  std::size_t end_bin = 0;
  double center_offset_hz = 0.0;  // relative to the recording center
  double center_hz = 0.0;         // absolute
  double bandwidth_hz = 0.0;
  double peak_db = 0.0;
  double mean_excess_db = 0.0;
  double channel_rate_hz = 0.0;
  std::vector<std::string> candidates;
  std::string method;  // empty when no candidate matched
  classify::VerdictKind verdict = classify::VerdictKind::DetectedUnidentified;
  std::string label;
  std::vector<classify::MatchedFeature> matched_features;
  std::optional<int> carrier_count;
  bool burst_detection_ran = false;
  bool continuous = false;
  std::vector<BurstRecord> bursts;
  std::vector<EvidenceSummary> evidence;
  std::optional<std::string> error;
  std::map<std::string, double> timing_s;
};

struct NoiseFloorSummary {
  std::size_t level_count = 0;
  double level_width_db = 0.0;
  std::size_t change_level = 0;
  double threshold_db = 0.0;
  bool low_confidence = false;
};

struct IdentificationReport {
  double sample_rate_hz = 0.0;
  double center_freq_hz = 0.0;
  std::size_t sample_count = 0;
  std::string description;
  std::size_t fft_size = 0;
  std::string window;
  double overlap = 0.0;
  std::size_t averaging_count = 0;
  NoiseFloorSummary noise_floor;
  std::vector<ComponentReport> components;
  std::map<std::string, double> timing_s;  // empty unless timing was requested
};

/// Intermediate data kept for plot export.
struct Artifacts {
  dsp::PowerSpectrum psd;
  std::vector<std::optional<sensing::CyclicProfile>> cyclic;  // per component
  std::vector<std::optional<dsp::Envelope>> envelopes;        // per component
};

/// Wideband sensing, then per component: candidate matching, channelization,
/// optional burst detection, method selection, sensing and decision. Errors
/// inside one component are recorded in its report entry.
IdentificationReport run_identification(const IqRecording& iq, const classify::ChannelPlan& plan,
                                        const PipelineConfig& config, Artifacts* artifacts = nullptr);

}  // namespace sigid::pipeline
