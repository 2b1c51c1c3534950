#include "sigid/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/bessel.hpp>

#include "sigid/error.hpp"
#include "sigid/fft.hpp"

namespace sigid::dsp {
namespace {

constexpr double kPi = std::numbers::pi;

double kaiser_beta(double atten_db) {
  if (atten_db > 50.0) return 0.1102 * (atten_db - 8.7);
  if (atten_db >= 21.0)
    return 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);
  return 0.0;
}

}  // namespace

std::string to_string(Window w) {
  switch (w) {
    case Window::Hann: return "hann";
    case Window::Hamming: return "hamming";
    case Window::Rect: return "rect";
  }
  return "unknown";
}

Window window_from_string(const std::string& name) {
  for (auto w : {Window::Hann, Window::Hamming, Window::Rect})
    if (to_string(w) == name) return w;
  throw ParameterError("unknown window '" + name + "'");
}

std::vector<double> make_window(Window w, std::size_t n) {
  std::vector<double> out(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
    if (w == Window::Hann) out[i] = 0.5 - 0.5 * c;
    if (w == Window::Hamming) out[i] = 0.54 - 0.46 * c;
  }
  return out;
}

PowerSpectrum welch_psd(const IqRecording& iq, std::size_t fft_size, Window window,
                        double overlap) {
  if (fft_size < 8 || !is_pow2(fft_size))
    throw ParameterError("welch_psd: fft_size must be a power of two >= 8");
  if (!(overlap >= 0.0 && overlap < 1.0))
    throw ParameterError("welch_psd: overlap must be in [0, 1)");
  if (!(iq.sample_rate_hz > 0.0)) throw ParameterError("welch_psd: sample rate must be > 0");
  if (iq.size() < fft_size)
    throw InsufficientDataError("welch_psd: recording shorter than fft_size");

  const auto w = make_window(window, fft_size);
  double wsum = 0.0;
  for (double v : w) wsum += v * v;
  const std::size_t hop = std::max<std::size_t>(
      1, fft_size - static_cast<std::size_t>(std::llround(overlap * static_cast<double>(fft_size))));
  const std::size_t segments = 1 + (iq.size() - fft_size) / hop;

  FftPlan plan(fft_size, FftDirection::Forward);
  Samples buf(fft_size);
  Samples spec(fft_size);
  std::vector<double> acc(fft_size, 0.0);
  for (std::size_t s = 0; s < segments; ++s) {
    const Complex* seg = iq.samples.data() + s * hop;
    for (std::size_t i = 0; i < fft_size; ++i) buf[i] = seg[i] * w[i];
    plan.execute(buf, spec);
    for (std::size_t k = 0; k < fft_size; ++k) acc[k] += std::norm(spec[k]);
  }

  PowerSpectrum out;
  out.fft_size = fft_size;
  out.averaging_count = segments;
  out.freq_axis = {-iq.sample_rate_hz / 2.0, iq.sample_rate_hz / static_cast<double>(fft_size)};
  out.values_db.resize(fft_size);
  const double norm = 1.0 / (wsum * static_cast<double>(segments));
  for (std::size_t j = 0; j < fft_size; ++j)
    out.values_db[j] = to_db(acc[(j + fft_size / 2) % fft_size] * norm);
  return out;
}

FirFilter design_bandpass(double fc, double bw, double fs, double transition, double atten) {
  if (!(fs > 0.0)) throw ParameterError("design_bandpass: fs must be > 0");
  if (!(bw > 0.0)) throw ParameterError("design_bandpass: bandwidth must be > 0");
  if (!(transition > 0.0)) throw ParameterError("design_bandpass: transition must be > 0");
  if (!(atten > 0.0)) throw ParameterError("design_bandpass: attenuation must be > 0");

  FirFilter f{{}, fc, bw, fs, transition, atten};
  if (bw >= fs) {
    f.taps = {1.0};
    return f;
  }
  const double nyq = fs / 2.0;
  if (fc + bw / 2.0 > nyq || fc - bw / 2.0 < -nyq)
    throw ParameterError("design_bandpass: passband exceeds [-fs/2, fs/2]");
  if (std::abs(fc) + bw / 2.0 + transition >= nyq)
    throw ParameterError("design_bandpass: stopband edge beyond fs/2");
  if (fc != 0.0 && std::abs(fc) - bw / 2.0 - transition <= 0.0)
    throw ParameterError("design_bandpass: band overlaps its mirror image at -fc");

  const double dw = 2.0 * kPi * transition / fs;
  auto len = static_cast<std::size_t>(std::ceil((atten - 7.95) / (2.285 * dw))) + 1;
  len = std::max<std::size_t>(len, 3);
  if (len % 2 == 0) ++len;

  const double cutoff = (bw / 2.0 + transition / 2.0) / fs;  // cycles/sample
  const double beta = kaiser_beta(atten);
  const double i0_beta = boost::math::cyl_bessel_i(0, beta);
  const auto mid = static_cast<long>(len / 2);
  f.taps.assign(len, 0.0);
  double dc = 0.0;
  for (long i = 0; i <= mid; ++i) {
    const double m = static_cast<double>(i - mid);
    const double sinc = m == 0.0 ? 2.0 * cutoff : std::sin(2.0 * kPi * cutoff * m) / (kPi * m);
    const double r = m / static_cast<double>(mid);
    const double win = boost::math::cyl_bessel_i(0, beta * std::sqrt(1.0 - r * r)) / i0_beta;
    f.taps[static_cast<std::size_t>(i)] = sinc * win;
    dc += (i == mid ? 1.0 : 2.0) * sinc * win;
  }
  for (long i = 0; i <= mid; ++i) {
    const double m = static_cast<double>(i - mid);
    double v = f.taps[static_cast<std::size_t>(i)] / dc;
    if (fc != 0.0) v *= 2.0 * std::cos(2.0 * kPi * fc / fs * m);
    f.taps[static_cast<std::size_t>(i)] = v;
    f.taps[len - 1 - static_cast<std::size_t>(i)] = v;
  }
  return f;
}

Samples apply_fir(std::span<const Complex> x, const FirFilter& filter) {
  if (filter.taps.empty()) throw ParameterError("apply_fir: empty filter");
  if (filter.is_identity()) {
    Samples out(x.begin(), x.end());
    for (auto& v : out) v *= filter.taps[0];
    return out;
  }
  if (x.empty()) return {};
  const std::size_t taps = filter.taps.size();
  const std::size_t p = next_pow2(x.size() + taps - 1);
  Samples a(p);
  Samples b(p);
  std::copy(x.begin(), x.end(), a.begin());
  for (std::size_t i = 0; i < taps; ++i) b[i] = filter.taps[i];
  FftPlan fwd(p, FftDirection::Forward);
  FftPlan inv(p, FftDirection::Inverse);
  Samples fa(p);
  Samples fb(p);
  fwd.execute(a, fa);
  fwd.execute(b, fb);
  for (std::size_t k = 0; k < p; ++k) fa[k] *= fb[k];
  inv.execute(fa, a);
  const std::size_t delay = (taps - 1) / 2;
  const double scale = 1.0 / static_cast<double>(p);
  Samples out(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) out[t] = a[t + delay] * scale;
  return out;
}

void frequency_shift(Samples& x, double freq_hz, double fs_hz, double phase0) {
  if (freq_hz == 0.0 && phase0 == 0.0) return;
  const double w = 2.0 * kPi * freq_hz / fs_hz;
  for (std::size_t t = 0; t < x.size(); ++t) {
    // Phase reduced per sample to keep precision on long recordings.
    const double ph = std::fmod(w * static_cast<double>(t), 2.0 * kPi) + phase0;
    x[t] *= std::polar(1.0, ph);
  }
}

IqRecording channelize(const IqRecording& iq, const nfspem::DetectedComponent& component,
                       const ChannelizeOptions& opt) {
  const double fs = iq.sample_rate_hz;
  if (!(opt.guard_factor > 0.0)) throw ParameterError("channelize: guard factor must be > 0");
  if (!(component.width > 0.0)) throw ParameterError("channelize: component width must be > 0");
  if (std::abs(component.center) > fs / 2.0)
    throw ParameterError("channelize: component center outside the recording band");

  const double bw = component.width * opt.guard_factor;
  const double transition = std::max(opt.transition_fraction * bw, fs / 1e4);
  if (bw >= fs || bw / 2.0 + transition >= fs / 2.0) return iq;  // nothing to reject

  IqRecording out;
  out.center_freq_hz = iq.center_freq_hz + component.center;
  out.description = iq.description;
  Samples mixed = iq.samples;
  frequency_shift(mixed, -component.center, fs);
  const auto filter = design_bandpass(0.0, bw, fs, transition, opt.stop_atten_db);
  Samples filtered = apply_fir(mixed, filter);

  std::size_t factor = 1;
  if (opt.decimate)
    while (fs / static_cast<double>(factor * 2) >= 2.5 * bw) factor *= 2;
  out.sample_rate_hz = fs / static_cast<double>(factor);
  out.samples.reserve(filtered.size() / factor + 1);
  for (std::size_t t = 0; t < filtered.size(); t += factor) out.samples.push_back(filtered[t]);
  return out;
}

Envelope power_envelope(const IqRecording& iq, std::size_t smooth_len) {
  if (smooth_len < 1) throw ParameterError("power_envelope: smooth_len must be >= 1");
  if (iq.samples.empty()) throw EmptyInputError("power_envelope: empty input");
  const std::size_t n = iq.size();
  std::vector<double> prefix(n + 1, 0.0);
  std::vector<std::size_t> nonzero(n + 1, 0);  // exact silence must stay at the floor
  for (std::size_t t = 0; t < n; ++t) {
    const double p = std::norm(iq.samples[t]);
    prefix[t + 1] = prefix[t] + p;
    nonzero[t + 1] = nonzero[t] + (p > 0.0 ? 1 : 0);
  }

  Envelope env;
  env.time_axis = {0.0, 1.0 / iq.sample_rate_hz};
  env.values_db.resize(n);
  const std::size_t before = (smooth_len - 1) / 2;
  const std::size_t after = smooth_len / 2;
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t lo = t >= before ? t - before : 0;
    const std::size_t hi = std::min(n, t + after + 1);
    const double mean = nonzero[hi] == nonzero[lo]
                            ? 0.0
                            : (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
    env.values_db[t] = to_db(std::max(mean, 0.0));
  }
  return env;
}

}  // namespace sigid::dsp
