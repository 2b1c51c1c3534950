#include <doctest.h>

#include <numbers>

#include "oracles.hpp"
#include "sigid/dsp.hpp"
#include "sigid/error.hpp"
#include "sigid/wavegen.hpp"

using namespace sigid;
using namespace sigid::dsp;

namespace {

IqRecording tone(double f, double fs, std::size_t n, double amp = 1.0) {
  IqRecording r;
  r.sample_rate_hz = fs;
  r.samples.resize(n);
  for (std::size_t t = 0; t < n; ++t)
    r.samples[t] = std::polar(amp, 2.0 * std::numbers::pi * f * static_cast<double>(t) / fs);
  return r;
}

double mean_power(const Samples& x, std::size_t skip = 0) {
  double s = 0.0;
  for (std::size_t t = skip; t < x.size() - skip; ++t) s += std::norm(x[t]);
  return s / static_cast<double>(x.size() - 2 * skip);
}

}  // namespace

TEST_SUITE("dsp") {

TEST_CASE("windows are periodic and named") {
  const auto w = make_window(Window::Hann, 8);
  CHECK(w[0] == doctest::Approx(0.0));
  CHECK(w[4] == doctest::Approx(1.0));
  CHECK(w[2] == doctest::Approx(w[6]));
  for (double v : make_window(Window::Rect, 5)) CHECK(v == 1.0);
  CHECK(window_from_string("hamming") == Window::Hamming);
  CHECK(to_string(Window::Hann) == "hann");
  CHECK_THROWS_AS(window_from_string("blackman"), ParameterError);
}

TEST_CASE("tone lands on its bin") {
  const double fs = 1024.0;
  const auto psd = welch_psd(tone(36.0, fs, 256), 256, Window::Rect, 0.0);
  CHECK(psd.averaging_count == 1);
  CHECK(psd.freq_axis.start == doctest::Approx(-512.0));
  CHECK(psd.freq_axis.step == doctest::Approx(4.0));
  const auto peak = std::max_element(psd.values_db.begin(), psd.values_db.end()) - psd.values_db.begin();
  CHECK(psd.freq_axis.at(static_cast<double>(peak)) == doctest::Approx(36.0));
  CHECK(psd.values_db[static_cast<std::size_t>(peak)] - oracle::median(psd.values_db) >= 30.0);
}

TEST_CASE("bin-centered tone and DFT oracle") {
  const double fs = 64.0;
  const auto rec = tone(5.0, fs, 64);
  const auto psd = welch_psd(rec, 64, Window::Rect, 0.0);
  const auto x = oracle::dft(rec.samples);
  for (std::size_t k = 0; k < 64; ++k) {
    const std::size_t bin = (k + 32) % 64;  // fftshift
    CHECK(std::abs(from_db(psd.values_db[bin]) - std::norm(x[k]) / 64.0) < 1e-9);
  }
}

TEST_CASE("all-zero input sits on the power floor") {
  IqRecording r;
  r.samples.assign(512, Complex{});
  const auto psd = welch_psd(r, 128);
  for (double v : psd.values_db) CHECK(v == doctest::Approx(to_db(0.0)));
}

TEST_CASE("Parseval for rect window without overlap") {
  const auto noise = wavegen::gen_awgn(4096, 3.0, 17);
  IqRecording r;
  r.samples = noise;
  const auto psd = welch_psd(r, 256, Window::Rect, 0.0);
  CHECK(psd.averaging_count == 16);
  double mean_psd = 0.0;
  for (double v : psd.values_db) mean_psd += from_db(v);
  mean_psd /= 256.0;
  CHECK(mean_psd == doctest::Approx(mean_power(noise)).epsilon(1e-6));
}

TEST_CASE("welch preconditions") {
  IqRecording r;
  r.samples.assign(100, Complex{1, 0});
  CHECK_THROWS_AS(welch_psd(r, 128), InsufficientDataError);
  CHECK_THROWS_AS(welch_psd(r, 4), ParameterError);
  CHECK_THROWS_AS(welch_psd(r, 48), ParameterError);
  CHECK_THROWS_AS(welch_psd(r, 64, Window::Hann, 1.0), ParameterError);
}

TEST_CASE("shifting the input rotates the spectrum") {
  const double fs = 1000.0;
  auto r = tone(0.0, fs, 2048);
  auto noise = wavegen::gen_awgn(2048, -20.0, 3);
  for (std::size_t t = 0; t < r.size(); ++t) r.samples[t] += noise[t];
  const auto base = welch_psd(r, 256, Window::Rect, 0.0);
  for (int shift_bins : {3, -17, 40}) {
    auto s = r;
    frequency_shift(s.samples, shift_bins * fs / 256.0, fs);
    const auto moved = welch_psd(s, 256, Window::Rect, 0.0);
    for (std::size_t i = 0; i < 256; ++i) {
      const std::size_t j = static_cast<std::size_t>((static_cast<long>(i) + shift_bins + 256) % 256);
      CHECK(moved.values_db[j] == doctest::Approx(base.values_db[i]).epsilon(1e-6));
    }
  }
}

TEST_CASE("lowpass design meets its mask") {
  const auto f = design_bandpass(0.0, 1e6, 10e6, 100e3, 60.0);
  REQUIRE(f.taps.size() % 2 == 1);
  for (std::size_t i = 0; i < f.taps.size(); ++i) CHECK(f.taps[i] == f.taps[f.taps.size() - 1 - i]);
  CHECK(std::abs(oracle::fir_gain_db(f.taps, 0.0, 10e6)) < 1.0);
  CHECK(oracle::fir_gain_db(f.taps, 0.4e6, 10e6) > -1.0);
  CHECK(oracle::fir_gain_db(f.taps, 0.6e6, 10e6) < -60.0);
  CHECK(oracle::fir_gain_db(f.taps, -0.6e6, 10e6) < -60.0);
  CHECK(oracle::fir_gain_db(f.taps, 2e6, 10e6) < -60.0);

  // filtering a 0.4 MHz tone loses under 1 dB in steady state
  const auto in = tone(0.4e6, 10e6, 8192);
  const auto out = apply_fir(in.samples, f);
  CHECK(10 * std::log10(mean_power(out, f.taps.size())) > -1.0);
}

TEST_CASE("bandpass with offset center") {
  const auto f = design_bandpass(2e6, 1e6, 10e6, 200e3, 50.0);
  for (std::size_t i = 0; i < f.taps.size(); ++i) CHECK(f.taps[i] == f.taps[f.taps.size() - 1 - i]);
  CHECK(std::abs(oracle::fir_gain_db(f.taps, 2e6, 10e6)) < 1.0);
  CHECK(oracle::fir_gain_db(f.taps, 2e6 + 0.7e6, 10e6) < -50.0);
  CHECK(oracle::fir_gain_db(f.taps, 0.0, 10e6) < -50.0);
}

TEST_CASE("full band design is the identity") {
  const auto f = design_bandpass(0.0, 10e6, 10e6, 100e3, 60.0);
  CHECK(f.is_identity());
  const auto in = wavegen::gen_awgn(1000, 0.0, 2);
  const auto out = apply_fir(in, f);
  for (std::size_t t = 0; t < in.size(); ++t) CHECK(std::abs(out[t] - in[t]) < 1e-12);
}

TEST_CASE("infeasible bands are rejected") {
  CHECK_THROWS_AS(design_bandpass(4.8e6, 1e6, 10e6, 100e3, 60.0), ParameterError);
  CHECK_THROWS_AS(design_bandpass(0.0, 0.0, 10e6, 100e3, 60.0), ParameterError);
  CHECK_THROWS_AS(design_bandpass(0.0, 1e6, 10e6, 0.0, 60.0), ParameterError);
}

TEST_CASE("apply_fir matches direct convolution") {
  const auto f = design_bandpass(0.0, 2e3, 10e3, 1e3, 40.0);
  const auto x = wavegen::gen_awgn(300, 0.0, 8);
  const auto y = apply_fir(x, f);
  const std::size_t len = f.taps.size();
  const std::size_t delay = (len - 1) / 2;
  for (std::size_t t = 0; t < x.size(); ++t) {
    Complex acc{};
    for (std::size_t j = 0; j < len; ++j) {
      const long src = static_cast<long>(t + delay) - static_cast<long>(j);
      if (src >= 0 && src < static_cast<long>(x.size())) acc += f.taps[j] * x[static_cast<std::size_t>(src)];
    }
    CHECK(std::abs(y[t] - acc) < 1e-9);
  }
}

TEST_CASE("channelize keeps the component and rejects distant tones") {
  const double fs = 10e6;
  nfspem::DetectedComponent c;
  c.center = 1.5e6;
  c.width = 500e3;
  const auto in_band = channelize(tone(1.5e6 + 50e3, fs, 65536), c);
  CHECK(in_band.sample_rate_hz < fs);
  CHECK(in_band.center_freq_hz == doctest::Approx(1.5e6));
  CHECK(10 * std::log10(mean_power(in_band.samples, 64)) > -1.0);

  const auto far = channelize(tone(1.5e6 + 1e6, fs, 65536), c);
  CHECK(10 * std::log10(mean_power(far.samples, 64)) < -60.0);
}

TEST_CASE("full-band component passes the input through") {
  const auto x = wavegen::gen_awgn(4096, 0.0, 4);
  IqRecording r;
  r.samples = x;
  r.sample_rate_hz = 1e6;
  nfspem::DetectedComponent c;
  c.center = 0.0;
  c.width = 1e6;
  const auto y = channelize(r, c, {1.0});
  CHECK(y.sample_rate_hz == r.sample_rate_hz);
  REQUIRE(y.size() == r.size());
  for (std::size_t t = 0; t < x.size(); ++t) CHECK(y.samples[t] == x[t]);
}

TEST_CASE("envelope") {
  IqRecording r;
  r.sample_rate_hz = 1000.0;
  r.samples.assign(500, Complex{0.0, 2.0});
  auto e = power_envelope(r, 16);
  REQUIRE(e.values_db.size() == 500);
  for (double v : e.values_db) CHECK(v == doctest::Approx(to_db(4.0)));
  CHECK(e.time_axis.step == doctest::Approx(1e-3));

  r.samples.assign(5000, Complex{});
  for (std::size_t t = 2000; t < 3000; ++t) r.samples[t] = {1.0, 0.0};
  e = power_envelope(r, 100);
  std::size_t above = 0;
  for (double v : e.values_db) above += v > to_db(0.0) + 1.0 ? 1 : 0;
  CHECK(above >= 900);
  CHECK(above <= 1100);

  r.samples = wavegen::gen_awgn(64, 0.0, 1);
  e = power_envelope(r, 1);
  for (std::size_t t = 0; t < 64; ++t) CHECK(e.values_db[t] == doctest::Approx(to_db(std::norm(r.samples[t]))));

  r.samples.clear();
  CHECK_THROWS_AS(power_envelope(r, 4), EmptyInputError);
}

TEST_CASE("envelope is local") {
  IqRecording a;
  a.samples = wavegen::gen_awgn(1000, 0.0, 5);
  IqRecording b;
  b.samples = wavegen::gen_awgn(1000, 10.0, 6);
  IqRecording ab;
  ab.samples = a.samples;
  ab.samples.insert(ab.samples.end(), b.samples.begin(), b.samples.end());
  const std::size_t len = 32;
  const auto ea = power_envelope(a, len);
  const auto eb = power_envelope(b, len);
  const auto eab = power_envelope(ab, len);
  for (std::size_t t = len; t + len < 1000; ++t) {
    CHECK(eab.values_db[t] == doctest::Approx(ea.values_db[t]).epsilon(1e-9));
    CHECK(eab.values_db[1000 + t] == doctest::Approx(eb.values_db[t]).epsilon(1e-9));
  }
}

}  // TEST_SUITE
