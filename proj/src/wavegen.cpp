#include "sigid/wavegen.hpp"

#include <algorithm>
#include <map>
#include <cmath>
#include <numbers>

#include "sigid/dsp.hpp"
#include "sigid/error.hpp"
#include "sigid/fft.hpp"
#include "sigid/random.hpp"

namespace sigid::wavegen {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Index of the symbol active at sample t, for symbols of rate `rate` starting
// at sample 0. The small bias keeps exact integer ratios from rounding down.
std::size_t symbol_at(std::size_t t, double rate, double fs) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(t) * rate / fs + 1e-9));
}

double rrc(double t, double symbol_period, double beta) {
  const double x = t / symbol_period;
  if (std::abs(x) < 1e-12) return 1.0 - beta + 4.0 * beta / std::numbers::pi;
  if (beta > 0.0 && std::abs(std::abs(x) - 1.0 / (4.0 * beta)) < 1e-9) {
    const double a = (1.0 + 2.0 / std::numbers::pi) * std::sin(std::numbers::pi / (4.0 * beta));
    const double b = (1.0 - 2.0 / std::numbers::pi) * std::cos(std::numbers::pi / (4.0 * beta));
    return beta / std::sqrt(2.0) * (a + b);
  }
  const double num = std::sin(std::numbers::pi * x * (1.0 - beta)) +
                     4.0 * beta * x * std::cos(std::numbers::pi * x * (1.0 + beta));
  const double den = std::numbers::pi * x * (1.0 - 16.0 * beta * beta * x * x);
  return num / den;
}

// Pulse-shaped symbol stream written into out[offset, offset + length).
// Symbol k is centered at (k + 0.5) symbol periods after `offset`.
void shape_symbols(const std::vector<Complex>& symbols, double rate, double fs,
                   PulseShape shape, double beta, int span, std::size_t offset,
                   std::size_t length, Samples& out) {
  if (shape == PulseShape::Rect) {
    for (std::size_t t = 0; t < length; ++t) {
      const std::size_t k = symbol_at(t, rate, fs);
      if (k < symbols.size()) out[offset + t] += symbols[k];
    }
    return;
  }
  const double period = 1.0 / rate;
  const auto half_span = static_cast<long>(span / 2 + 1);
  for (std::size_t t = 0; t < length; ++t) {
    const double time = static_cast<double>(t) / fs;
    const long center = static_cast<long>(std::floor(time * rate));
    Complex acc{};
    for (long k = center - half_span; k <= center + half_span; ++k) {
      if (k < 0 || k >= static_cast<long>(symbols.size())) continue;
      acc += symbols[static_cast<std::size_t>(k)] *
             rrc(time - (static_cast<double>(k) + 0.5) * period, period, beta);
    }
    out[offset + t] += acc;
  }
}

std::vector<Band> merge_bands(std::vector<Band> bands) {
  std::sort(bands.begin(), bands.end(),
            [](const Band& a, const Band& b) { return a.low_hz < b.low_hz; });
  std::vector<Band> merged;
  for (const auto& b : bands) {
    if (!merged.empty() && b.low_hz <= merged.back().high_hz)
      merged.back().high_hz = std::max(merged.back().high_hz, b.high_hz);
    else
      merged.push_back(b);
  }
  return merged;
}

bool is_burst_kind(ChannelKind kind) {
  return kind == ChannelKind::PskBurst || kind == ChannelKind::FskHeaderBurst;
}

double pulse_bandwidth(const ChannelSpec& spec) {
  return spec.shaping == PulseShape::RootRaisedCosine
             ? spec.symbol_rate_hz * (1.0 + spec.rolloff)
             : spec.symbol_rate_hz;
}

std::vector<double> dsss_carrier_offsets(const ChannelSpec& spec) {
  std::vector<double> offsets;
  const double mid = 0.5 * static_cast<double>(spec.carrier_count - 1);
  for (int i = 0; i < spec.carrier_count; ++i)
    offsets.push_back((static_cast<double>(i) - mid) * spec.carrier_spacing_hz);
  return offsets;
}

std::pair<int, int> ofdm_subcarrier_range(const ChannelSpec& spec) {
  const int active = spec.active_subcarriers > 0 ? spec.active_subcarriers : spec.useful_length;
  const int lo = -(active / 2);
  return {lo, lo + active - 1};
}

// Fraction of the waveform's energy inside `bands` (relative to 0 Hz).
double in_band_fraction(const Samples& x, const std::vector<Band>& bands, double fs) {
  const std::size_t p = next_pow2(x.size());
  Samples padded(p);
  std::copy(x.begin(), x.end(), padded.begin());
  const Samples spec = fft(padded);
  double total = 0.0;
  double inside = 0.0;
  for (std::size_t k = 0; k < p; ++k) {
    const double e = std::norm(spec[k]);
    total += e;
    const long signed_k = k < p / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(p);
    const double f = static_cast<double>(signed_k) * fs / static_cast<double>(p);
    for (const auto& b : bands)
      if (f >= b.low_hz && f < b.high_hz) {
        inside += e;
        break;
      }
  }
  return total > 0.0 ? inside / total : 0.0;
}

struct RectSource {
  std::vector<std::size_t> bins;
  double bin_power;
  Rng rng;
};

std::vector<std::size_t> rect_bins(const ChannelSpec& spec, double fs) {
  const auto block = static_cast<std::size_t>(spec.block_len);
  const double lo = spec.center_freq_hz - spec.bandwidth_hz / 2.0;
  const double hi = spec.center_freq_hz + spec.bandwidth_hz / 2.0;
  std::vector<std::size_t> bins;
  for (std::size_t k = 0; k < block; ++k) {
    const long signed_k = k < block / 2 ? static_cast<long>(k)
                                        : static_cast<long>(k) - static_cast<long>(block);
    const double f = static_cast<double>(signed_k) * fs / static_cast<double>(block);
    if (f >= lo && f < hi) bins.push_back(k);
  }
  return bins;
}

// Independent Gaussian bins per block, one inverse FFT for all sources that
// share the block length.
void add_rect_spectra(std::vector<RectSource>& sources, std::size_t block, Samples& mix) {
  const std::size_t n = mix.size();
  Samples freq(block);
  Samples time(block);
  FftPlan inverse(block, FftDirection::Inverse);
  const double scale = 1.0 / static_cast<double>(block);
  for (std::size_t start = 0; start < n; start += block) {
    std::fill(freq.begin(), freq.end(), Complex{});
    for (auto& src : sources)
      for (std::size_t k : src.bins) freq[k] += src.rng.complex_normal(src.bin_power);
    inverse.execute(freq, time);
    const std::size_t count = std::min(block, n - start);
    for (std::size_t t = 0; t < count; ++t) mix[start + t] += time[t] * scale;
  }
}

}  // namespace

std::string to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::PskBurst: return "psk_burst";
    case ChannelKind::Dsss: return "dsss";
    case ChannelKind::Ofdm: return "ofdm";
    case ChannelKind::FskHeaderBurst: return "fsk_header_burst";
    case ChannelKind::RectSpectrum: return "rect_spectrum";
  }
  return "unknown";
}

ChannelKind channel_kind_from_string(const std::string& name) {
  for (auto k : {ChannelKind::PskBurst, ChannelKind::Dsss, ChannelKind::Ofdm,
                 ChannelKind::FskHeaderBurst, ChannelKind::RectSpectrum})
    if (to_string(k) == name) return k;
  throw ParameterError("unknown channel kind '" + name + "'");
}

std::string to_string(PulseShape shape) {
  return shape == PulseShape::Rect ? "rect" : "rrc";
}

PulseShape pulse_shape_from_string(const std::string& name) {
  if (name == "rect") return PulseShape::Rect;
  if (name == "rrc") return PulseShape::RootRaisedCosine;
  throw ParameterError("unknown pulse shape '" + name + "'");
}

std::size_t ScenarioSpec::sample_count() const {
  return static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
}

double GroundTruth::occupancy_fraction() const {
  if (occupancy_mask.empty()) return 0.0;
  const auto on = std::count(occupancy_mask.begin(), occupancy_mask.end(), true);
  return static_cast<double>(on) / static_cast<double>(occupancy_mask.size());
}

Samples gen_awgn(std::size_t n, double power_dbw, std::uint64_t seed) {
  if (n == 0) throw EmptyInputError("gen_awgn: sample count must be >= 1");
  Rng rng(seed);
  const double power = from_db(power_dbw);
  Samples out(n);
  for (auto& v : out) v = rng.complex_normal(power);
  return out;
}

std::vector<BurstInterval> burst_intervals(const ChannelSpec& spec,
                                           double sample_rate_hz, std::size_t n) {
  std::vector<BurstInterval> out;
  for (const auto& b : spec.bursts) {
    if (b.start_s < 0.0 || b.duration_s <= 0.0)
      throw ParameterError("burst windows need start >= 0 and duration > 0");
    const auto start = static_cast<std::size_t>(std::llround(b.start_s * sample_rate_hz));
    const auto length = static_cast<std::size_t>(std::llround(b.duration_s * sample_rate_hz));
    if (length == 0) throw ParameterError("burst shorter than one sample");
    if (start + length > n) throw ParameterError("burst schedule exceeds the recording duration");
    out.push_back({start, length});
  }
  std::sort(out.begin(), out.end(), [](const BurstInterval& a, const BurstInterval& b) {
    return a.start_sample < b.start_sample;
  });
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i].start_sample < out[i - 1].start_sample + out[i - 1].length)
      throw ParameterError("burst windows overlap");
  return out;
}

void validate(const ChannelSpec& spec, double fs, std::size_t n) {
  const double nyquist = fs / 2.0;
  switch (spec.kind) {
    case ChannelKind::PskBurst:
    case ChannelKind::Dsss:
    case ChannelKind::FskHeaderBurst:
      if (!(spec.symbol_rate_hz > 0.0) || spec.symbol_rate_hz > nyquist)
        throw ParameterError(to_string(spec.kind) + ": symbol/chip rate must be in (0, fs/2]");
      if (spec.shaping == PulseShape::RootRaisedCosine &&
          (spec.rolloff < 0.0 || spec.rolloff > 1.0 || spec.rrc_span_symbols < 2))
        throw ParameterError("rrc shaping needs rolloff in [0, 1] and span >= 2");
      break;
    case ChannelKind::Ofdm:
      if (spec.useful_length < 2) throw ParameterError("ofdm: useful length must be >= 2");
      if (spec.cp_length < 0 || spec.cp_length >= spec.useful_length)
        throw ParameterError("ofdm: cyclic prefix must satisfy 0 <= cp < useful length");
      if (spec.active_subcarriers < 0 || spec.active_subcarriers > spec.useful_length)
        throw ParameterError("ofdm: active subcarriers must be in [0, useful length]");
      break;
    case ChannelKind::RectSpectrum:
      if (!(spec.bandwidth_hz > 0.0)) throw ParameterError("rect_spectrum: bandwidth must be > 0");
      if (spec.block_len < 1) throw ParameterError("rect_spectrum: block length must be >= 1");
      break;
  }
  if (spec.kind == ChannelKind::PskBurst && spec.bits_per_symbol != 1 && spec.bits_per_symbol != 2)
    throw ParameterError("psk_burst: bits per symbol must be 1 or 2");
  if (spec.kind == ChannelKind::Dsss && spec.carrier_count < 1)
    throw ParameterError("dsss: carrier count must be >= 1");
  if (spec.kind == ChannelKind::Dsss && spec.carrier_count > 1 && !(spec.carrier_spacing_hz > 0.0))
    throw ParameterError("dsss: multi-carrier needs a positive carrier spacing");
  if (spec.kind == ChannelKind::FskHeaderBurst) {
    if (spec.header_len < 1) throw ParameterError("fsk: header length must be >= 1");
    if (!(spec.modulation_index > 0.0)) throw ParameterError("fsk: modulation index must be > 0");
  }
  if (!is_burst_kind(spec.kind) && !spec.bursts.empty())
    throw ParameterError(to_string(spec.kind) + " is continuous; burst windows are not allowed");
  for (const auto& b : occupied_bands(spec, fs))
    if (b.low_hz < -nyquist || b.high_hz > nyquist)
      throw ParameterError(to_string(spec.kind) + ": occupied band exceeds [-fs/2, fs/2]");
  burst_intervals(spec, fs, n);
}

void validate(const ScenarioSpec& spec) {
  if (!(spec.sample_rate_hz > 0.0)) throw ParameterError("sample rate must be > 0");
  if (!(spec.duration_s > 0.0)) throw ParameterError("duration must be > 0");
  if (spec.sample_count() < 1) throw ParameterError("duration x sample rate is below one sample");
  if (spec.mask_fft_size < 2) throw ParameterError("mask FFT size must be >= 2");
  for (const auto& c : spec.channels) validate(c, spec.sample_rate_hz, spec.sample_count());
}

std::vector<Band> occupied_bands(const ChannelSpec& spec, double fs) {
  const double c = spec.center_freq_hz;
  switch (spec.kind) {
    case ChannelKind::PskBurst: {
      const double half = pulse_bandwidth(spec) / 2.0;
      return {{c - half, c + half}};
    }
    case ChannelKind::Dsss: {
      const double half = pulse_bandwidth(spec) / 2.0;
      std::vector<Band> bands;
      for (double off : dsss_carrier_offsets(spec)) bands.push_back({c + off - half, c + off + half});
      return merge_bands(bands);
    }
    case ChannelKind::Ofdm: {
      const double spacing = fs / spec.useful_length;
      const auto [lo, hi] = ofdm_subcarrier_range(spec);
      if (hi - lo + 1 >= spec.useful_length) return {{c - fs / 2.0, c + fs / 2.0}};  // every bin, wraps
      return {{c + (lo - 0.5) * spacing, c + (hi + 0.5) * spacing}};
    }
    case ChannelKind::FskHeaderBurst: {
      const double half = (1.0 + spec.modulation_index) * spec.symbol_rate_hz / 2.0;
      return {{c - half, c + half}};
    }
    case ChannelKind::RectSpectrum:
      return {{c - spec.bandwidth_hz / 2.0, c + spec.bandwidth_hz / 2.0}};
  }
  return {};
}

std::vector<double> expected_features(const ChannelSpec& spec, double fs) {
  switch (spec.kind) {
    case ChannelKind::PskBurst:
    case ChannelKind::FskHeaderBurst:
      return {spec.symbol_rate_hz};
    case ChannelKind::Dsss: {
      std::vector<double> f{spec.symbol_rate_hz};
      for (int k = 1; k < spec.carrier_count; ++k) f.push_back(k * spec.carrier_spacing_hz);
      return f;
    }
    case ChannelKind::Ofdm:
      if (spec.cp_length == 0) return {};
      return {fs / (spec.useful_length + spec.cp_length)};
    case ChannelKind::RectSpectrum:
      return {};
  }
  return {};
}

Samples gen_dsss(const ChannelSpec& spec, double fs, std::size_t n, std::uint64_t seed) {
  validate(spec, fs, n);
  Rng rng(seed);
  const std::size_t chip_count = symbol_at(n, spec.symbol_rate_hz, fs) + 2;
  std::vector<Complex> chips(chip_count);
  for (auto& c : chips) c = rng.bit() ? 1.0 : -1.0;

  Samples chip_wave(n);
  shape_symbols(chips, spec.symbol_rate_hz, fs, spec.shaping, spec.rolloff,
                spec.rrc_span_symbols, 0, n, chip_wave);
  if (spec.carrier_count == 1) return chip_wave;

  Samples out(n);
  for (double offset : dsss_carrier_offsets(spec)) {
    const double phase0 = kTwoPi * rng.uniform();
    Samples carrier = chip_wave;
    dsp::frequency_shift(carrier, offset, fs, phase0);
    for (std::size_t t = 0; t < n; ++t) out[t] += carrier[t];
  }
  return out;
}

Samples gen_ofdm(const ChannelSpec& spec, double fs, std::size_t n, std::uint64_t seed) {
  validate(spec, fs, n);
  Rng rng(seed);
  const auto useful = static_cast<std::size_t>(spec.useful_length);
  const auto cp = static_cast<std::size_t>(spec.cp_length);
  const auto [lo, hi] = ofdm_subcarrier_range(spec);
  FftPlan inverse(useful, FftDirection::Inverse);
  Samples freq(useful);
  Samples time(useful);
  Samples out;
  out.reserve(n + useful + cp);
  const double a = 1.0 / std::sqrt(2.0);
  while (out.size() < n) {
    std::fill(freq.begin(), freq.end(), Complex{});
    for (int k = lo; k <= hi; ++k) {
      const auto idx = static_cast<std::size_t>((k + spec.useful_length) % spec.useful_length);
      freq[idx] = {rng.bit() ? a : -a, rng.bit() ? a : -a};
    }
    inverse.execute(freq, time);
    out.insert(out.end(), time.end() - static_cast<long>(cp), time.end());
    out.insert(out.end(), time.begin(), time.end());
  }
  out.resize(n);
  return out;
}

std::vector<int> fsk_header_pattern(int header_len, std::uint64_t header_seed) {
  Rng rng(derive_seed(header_seed, 0x4845));
  std::vector<int> bits(static_cast<std::size_t>(std::max(header_len, 0)));
  int prev = 1;
  for (auto& b : bits) {
    prev = rng.uniform() < 0.75 ? -prev : prev;
    b = prev;
  }
  return bits;
}

namespace {

// Continuous-phase FSK of the given symbols written into out[offset...].
void write_cpfsk(const std::vector<int>& symbols, double rate, double h, double fs,
                 double phase0, std::size_t offset, std::size_t length, Samples& out) {
  double phase = phase0;
  const double dev = h * rate / 2.0;  // peak frequency deviation, Hz
  for (std::size_t t = 0; t < length; ++t) {
    const std::size_t k = std::min(symbol_at(t, rate, fs), symbols.size() - 1);
    out[offset + t] = std::polar(1.0, phase);
    phase = std::fmod(phase + kTwoPi * symbols[k] * dev / fs, kTwoPi);
  }
}

}  // namespace

Samples fsk_header_waveform(double rate, double h, int header_len,
                            std::uint64_t header_seed, double fs) {
  const auto header = fsk_header_pattern(header_len, header_seed);
  const auto length = static_cast<std::size_t>(std::llround(header_len * fs / rate));
  Samples out(length);
  write_cpfsk(header, rate, h, fs, 0.0, 0, length, out);
  return out;
}

Samples gen_fsk_header_burst(const ChannelSpec& spec, double fs, std::size_t n,
                             std::uint64_t seed) {
  validate(spec, fs, n);
  Rng rng(seed);
  const auto header = fsk_header_pattern(spec.header_len, spec.header_seed);
  Samples out(n);
  for (const auto& burst : burst_intervals(spec, fs, n)) {
    const std::size_t nsym = symbol_at(burst.length, spec.symbol_rate_hz, fs) + 1;
    std::vector<int> symbols(std::max(nsym, header.size()));
    for (std::size_t k = 0; k < symbols.size(); ++k)
      symbols[k] = k < header.size() ? header[k] : (rng.bit() ? 1 : -1);
    write_cpfsk(symbols, spec.symbol_rate_hz, spec.modulation_index, fs,
                kTwoPi * rng.uniform(), burst.start_sample, burst.length, out);
  }
  return out;
}

Samples gen_psk_burst(const ChannelSpec& spec, double fs, std::size_t n, std::uint64_t seed) {
  validate(spec, fs, n);
  Rng rng(seed);
  Samples out(n);
  const double a = spec.bits_per_symbol == 2 ? 1.0 / std::sqrt(2.0) : 1.0;
  for (const auto& burst : burst_intervals(spec, fs, n)) {
    const std::size_t nsym = symbol_at(burst.length, spec.symbol_rate_hz, fs) + 1;
    std::vector<Complex> symbols(nsym);
    for (auto& s : symbols) {
      const double re = rng.bit() ? a : -a;
      const double im = spec.bits_per_symbol == 2 ? (rng.bit() ? a : -a) : 0.0;
      s = {re, im};
    }
    shape_symbols(symbols, spec.symbol_rate_hz, fs, spec.shaping, spec.rolloff,
                  spec.rrc_span_symbols, burst.start_sample, burst.length, out);
  }
  return out;
}

std::vector<bool> occupancy_mask(const std::vector<Band>& bands, double fs, std::size_t fft_size) {
  std::vector<bool> mask(fft_size, false);
  const double step = fs / static_cast<double>(fft_size);
  for (std::size_t j = 0; j < fft_size; ++j) {
    const double f = -fs / 2.0 + static_cast<double>(j) * step;
    for (const auto& b : bands)
      if (f >= b.low_hz && f < b.high_hz) {
        mask[j] = true;
        break;
      }
  }
  return mask;
}

Scenario compose_scenario(const ScenarioSpec& spec) {
  validate(spec);
  const double fs = spec.sample_rate_hz;
  const std::size_t n = spec.sample_count();
  const double noise_power = from_db(spec.noise_power_dbw);

  Scenario result;
  result.recording.sample_rate_hz = fs;
  result.recording.center_freq_hz = spec.center_freq_hz;
  result.recording.description = spec.description;
  result.recording.samples = gen_awgn(n, spec.noise_power_dbw, derive_seed(spec.seed, 0));
  auto& mix = result.recording.samples;

  std::vector<Band> active_bands;
  std::map<std::size_t, std::vector<RectSource>> rect_groups;
  for (std::size_t i = 0; i < spec.channels.size(); ++i) {
    const auto& ch = spec.channels[i];
    const std::uint64_t seed = derive_seed(spec.seed, i + 1);
    const auto bands = occupied_bands(ch, fs);
    const auto bursts = burst_intervals(ch, fs, n);
    result.truth.occupied_bands.push_back(bands);
    result.truth.burst_intervals.push_back(bursts);
    result.truth.feature_table.push_back(expected_features(ch, fs));

    const bool silent = is_burst_kind(ch.kind) && bursts.empty();
    if (silent) continue;
    active_bands.insert(active_bands.end(), bands.begin(), bands.end());

    double band_width = 0.0;
    for (const auto& b : bands) band_width += b.width();
    const double target_in_band = from_db(ch.snr_db) * noise_power * band_width / fs;

    if (ch.kind == ChannelKind::RectSpectrum) {
      // Per-bin variance v gives in-band power m*v/B^2 for m occupied bins of B.
      const double bin_power = from_db(ch.snr_db) * noise_power * ch.block_len;
      rect_groups[static_cast<std::size_t>(ch.block_len)].push_back({rect_bins(ch, fs), bin_power, Rng(seed)});
      continue;
    }

    Samples s;
    switch (ch.kind) {
      case ChannelKind::PskBurst: s = gen_psk_burst(ch, fs, n, seed); break;
      case ChannelKind::Dsss: s = gen_dsss(ch, fs, n, seed); break;
      case ChannelKind::Ofdm: s = gen_ofdm(ch, fs, n, seed); break;
      case ChannelKind::FskHeaderBurst: s = gen_fsk_header_burst(ch, fs, n, seed); break;
      case ChannelKind::RectSpectrum: break;
    }

    std::size_t on_samples = n;
    if (is_burst_kind(ch.kind)) {
      on_samples = 0;
      for (const auto& b : bursts) on_samples += b.length;
    }
    double energy = 0.0;
    for (const auto& v : s) energy += std::norm(v);
    std::vector<Band> baseband;
    for (const auto& b : bands) baseband.push_back({b.low_hz - ch.center_freq_hz, b.high_hz - ch.center_freq_hz});
    const double fraction = in_band_fraction(s, baseband, fs);
    const double on_power = energy / static_cast<double>(on_samples);
    if (!(fraction * on_power > 0.0)) continue;
    const double gain = std::sqrt(target_in_band / (fraction * on_power));
    for (auto& v : s) v *= gain;
    dsp::frequency_shift(s, ch.center_freq_hz, fs);
    for (std::size_t t = 0; t < n; ++t) mix[t] += s[t];
  }

  for (auto& [block, sources] : rect_groups) add_rect_spectra(sources, block, mix);

  result.truth.fft_size = spec.mask_fft_size;
  result.truth.occupancy_mask = occupancy_mask(active_bands, fs, spec.mask_fft_size);
  return result;
}

}  // namespace sigid::wavegen
