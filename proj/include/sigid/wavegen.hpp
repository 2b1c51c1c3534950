#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sigid/types.hpp"

namespace sigid::wavegen {

enum class ChannelKind { PskBurst, Dsss, Ofdm, FskHeaderBurst, RectSpectrum };
enum class PulseShape { Rect, RootRaisedCosine };

std::string to_string(ChannelKind kind);
ChannelKind channel_kind_from_string(const std::string& name);
std::string to_string(PulseShape shape);
PulseShape pulse_shape_from_string(const std::string& name);

struct BurstWindow {
  double start_s = 0.0;
  double duration_s = 0.0;
};

/// One transmitter. Only the fields relevant to `kind` are read.
struct ChannelSpec {
  ChannelKind kind = ChannelKind::Dsss;
  double center_freq_hz = 0.0;  // offset from the recording center
  double snr_db = 10.0;         // in-band signal power over in-band noise power

  // PskBurst symbol rate, Dsss chip rate, FskHeaderBurst symbol rate.
  double symbol_rate_hz = 1e6;
  int bits_per_symbol = 2;  // PskBurst: 1 = BPSK, 2 = QPSK
  PulseShape shaping = PulseShape::Rect;
  double rolloff = 0.35;
  int rrc_span_symbols = 8;

  // Dsss
  int carrier_count = 1;
  double carrier_spacing_hz = 0.0;

  // Ofdm
  int useful_length = 64;
  int cp_length = 16;
  int active_subcarriers = 0;  // 0 = all useful_length subcarriers

  // FskHeaderBurst
  double modulation_index = 0.5;
  int header_len = 54;
  std::uint64_t header_seed = 0x5a17;

  // RectSpectrum: ideal flat spectrum synthesized block-by-block so that a
  // rectangular-window periodogram with the same block length has no leakage.
  double bandwidth_hz = 0.0;
  int block_len = 1024;

  // On-air schedule for the burst kinds (PskBurst, FskHeaderBurst). An empty
  // schedule means the channel never transmits. Must be empty otherwise.
  std::vector<BurstWindow> bursts;
};

struct ScenarioSpec {
  double sample_rate_hz = 1e6;
  double center_freq_hz = 0.0;
  double duration_s = 1e-3;
  double noise_power_dbw = 0.0;
  std::vector<ChannelSpec> channels;
  std::uint64_t seed = 1;
  std::size_t mask_fft_size = 1024;  // resolution of GroundTruth::occupancy_mask
  std::string description;

  std::size_t sample_count() const;
};

/// Frequency interval relative to the recording center.
struct Band {
  double low_hz = 0.0;
  double high_hz = 0.0;
  double width() const noexcept { return high_hz - low_hz; }
};

struct BurstInterval {
  std::size_t start_sample = 0;
  std::size_t length = 0;
};

struct GroundTruth {
  std::size_t fft_size = 0;
  std::vector<bool> occupancy_mask;  // bins ordered -fs/2 .. +fs/2
  std::vector<std::vector<BurstInterval>> burst_intervals;  // per channel
  std::vector<std::vector<double>> feature_table;           // per channel, Hz
  std::vector<std::vector<Band>> occupied_bands;            // per channel

  double occupancy_fraction() const;
};

/// Circularly-symmetric complex white Gaussian noise with mean power
/// 10^(power_dbw/10).
Samples gen_awgn(std::size_t n, double power_dbw, std::uint64_t seed);

/// Unit-scale channel waveforms at baseband (centered on 0 Hz, not yet
/// power-calibrated). `n` is the recording length in samples.
Samples gen_dsss(const ChannelSpec& spec, double sample_rate_hz, std::size_t n,
                 std::uint64_t seed);
Samples gen_ofdm(const ChannelSpec& spec, double sample_rate_hz, std::size_t n,
                 std::uint64_t seed);
Samples gen_fsk_header_burst(const ChannelSpec& spec, double sample_rate_hz,
                             std::size_t n, std::uint64_t seed);
Samples gen_psk_burst(const ChannelSpec& spec, double sample_rate_hz,
                      std::size_t n, std::uint64_t seed);

/// Header symbols (+1/-1) for a given seed: pseudorandom with a strong bias
/// towards alternation.
std::vector<int> fsk_header_pattern(int header_len, std::uint64_t header_seed);

/// Noise-free header waveform at `sample_rate_hz`, usable as a matched-filter
/// template for channels built with the same parameters.
Samples fsk_header_waveform(double symbol_rate_hz, double modulation_index,
                            int header_len, std::uint64_t header_seed,
                            double sample_rate_hz);

/// Occupied bands of a channel, relative to the recording center.
std::vector<Band> occupied_bands(const ChannelSpec& spec, double sample_rate_hz);

/// Expected cyclic frequencies (Hz) of the channel's conjugate cyclic
/// autocorrelation.
std::vector<double> expected_features(const ChannelSpec& spec,
                                      double sample_rate_hz);

/// Burst schedule in samples; validates against the recording length.
std::vector<BurstInterval> burst_intervals(const ChannelSpec& spec,
                                           double sample_rate_hz, std::size_t n);

/// Throws ParameterError on any violated invariant.
void validate(const ScenarioSpec& spec);
void validate(const ChannelSpec& spec, double sample_rate_hz, std::size_t n);

struct Scenario {
  IqRecording recording;
  GroundTruth truth;
};

/// Sum of power-calibrated channels plus AWGN. Deterministic in the spec.
Scenario compose_scenario(const ScenarioSpec& spec);

/// Occupancy mask for arbitrary bands at `fft_size` bins: bin j is occupied
/// when its center frequency lies in [low, high) of some band.
std::vector<bool> occupancy_mask(const std::vector<Band>& bands,
                                 double sample_rate_hz, std::size_t fft_size);

}  // namespace sigid::wavegen
