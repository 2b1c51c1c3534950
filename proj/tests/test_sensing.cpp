#include <doctest.h>

#include <numbers>

#include "oracles.hpp"
#include "sigid/dsp.hpp"
#include "sigid/error.hpp"
#include "sigid/random.hpp"
#include "sigid/sensing.hpp"
#include "sigid/wavegen.hpp"

using namespace sigid;
using namespace sigid::sensing;

namespace {

IqRecording rec(Samples x, double fs = 1e6) {
  IqRecording r;
  r.samples = std::move(x);
  r.sample_rate_hz = fs;
  return r;
}

IqRecording ofdm_recording(double snr_db, std::size_t symbols, std::uint64_t seed, int cp = 16) {
  wavegen::ScenarioSpec s;
  s.sample_rate_hz = 1e6;
  s.duration_s = static_cast<double>(symbols * static_cast<std::size_t>(64 + cp)) / 1e6;
  s.seed = seed;
  wavegen::ChannelSpec c;
  c.kind = wavegen::ChannelKind::Ofdm;
  c.useful_length = 64;
  c.cp_length = cp;
  c.snr_db = snr_db;
  s.channels = {c};
  return wavegen::compose_scenario(s).recording;
}

}  // namespace

TEST_SUITE("sensing") {

TEST_CASE("method names round-trip") {
  for (auto m : {Method::Energy, Method::Cyclo, Method::Autocorr, Method::MatchedFilter, Method::TemplateMatch})
    CHECK(method_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(method_from_string("wavelet"), ParameterError);
}

TEST_CASE("energy detector false-alarm and detection rates") {
  const std::size_t trials = 10000;
  const std::size_t m = 1000;
  std::size_t false_alarms = 0;
  std::size_t hits = 0;
  Rng rng(77);
  IqRecording r;
  r.samples.resize(m);
  for (std::size_t i = 0; i < trials; ++i) {
    for (auto& v : r.samples) v = rng.complex_normal(1.0);
    false_alarms += energy_detect(r, 1.0, 0.05).detected ? 1 : 0;
    for (auto& v : r.samples) v += rng.complex_normal(10.0);
    hits += energy_detect(r, 1.0, 0.05).detected ? 1 : 0;
  }
  const double pfa = static_cast<double>(false_alarms) / trials;
  CHECK(pfa >= 0.04);
  CHECK(pfa <= 0.06);
  CHECK(static_cast<double>(hits) / trials > 0.999);
}

TEST_CASE("energy detector threshold falls as pfa rises") {
  const auto r = rec(wavegen::gen_awgn(1000, 0.0, 1));
  double last = energy_detect(r, 1.0, 0.001).threshold;
  for (double pfa : {0.01, 0.05, 0.1, 0.3, 0.49}) {
    const double t = energy_detect(r, 1.0, pfa).threshold;
    CHECK(t < last);
    last = t;
  }
  CHECK_THROWS_AS(energy_detect(r, 0.0, 0.05), ParameterError);
  CHECK_THROWS_AS(energy_detect(r, 1.0, 0.5), ParameterError);
  CHECK_THROWS_AS(energy_detect(rec(wavegen::gen_awgn(99, 0.0, 1)), 1.0, 0.05), InsufficientDataError);
}

TEST_CASE("autocorrelation and CAF against brute force") {
  const auto x = wavegen::gen_awgn(700, 0.0, 3);
  const auto r = rec(x, 1e6);
  const auto ac = sample_autocorrelation(r, {0, 20});
  const auto c0 = cyclic_autocorrelation(r, 0.0, {0, 20});
  REQUIRE(ac.values.size() == 21);
  for (std::size_t tau = 0; tau <= 20; ++tau) {
    CHECK(c0.values[tau] == ac.values[tau]);
    CHECK(std::abs(ac.values[tau] - oracle::autocorr(x, tau)) < 1e-12);
  }
  const auto c = cyclic_autocorrelation(r, 123e3, {3, 9});
  for (std::size_t tau = 3; tau <= 9; ++tau)
    CHECK(std::abs(c.values[tau - 3] - oracle::caf(x, 123e3, 1e6, tau)) < 1e-12);

  const auto cut = sample_autocorrelation(r, {690, 720});
  CHECK(cut.truncated);
  CHECK(cut.range.last == 699);
  CHECK_THROWS_AS(cyclic_autocorrelation(r, 0.6e6, {0, 1}), ParameterError);
}

TEST_CASE("CAF vanishes for white noise off cycle") {
  const std::size_t n = 100000;
  const auto r = rec(wavegen::gen_awgn(n, 0.0, 21), 1.6e6);
  const auto c = cyclic_autocorrelation(r, 1.6e6 / 16.0, {0, 32});
  for (const auto& v : c.values) CHECK(std::abs(v) < 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("CAF magnitude ignores a global phase") {
  auto x = wavegen::gen_dsss([] {
    wavegen::ChannelSpec c;
    c.symbol_rate_hz = 0.25e6;
    return c;
  }(), 1e6, 4000, 2);
  const auto a = cyclic_autocorrelation(rec(x), 0.25e6, {0, 8});
  for (auto& v : x) v *= std::polar(1.0, 1.234);
  const auto b = cyclic_autocorrelation(rec(x), 0.25e6, {0, 8});
  for (std::size_t i = 0; i < a.values.size(); ++i)
    CHECK(std::abs(a.values[i]) == doctest::Approx(std::abs(b.values[i])).epsilon(1e-10));
}

TEST_CASE("scan_cyclic matches the oracle on exact bins") {
  const std::size_t n = 1024;
  const double fs = 1024.0;
  const auto x = wavegen::gen_awgn(n, 0.0, 8);
  const auto r = rec(x, fs);
  for (double alpha : {5.0, 100.0, 257.0}) {
    const auto prof = scan_cyclic(r, {alpha}, {0, 6});
    double best = 0.0;
    for (std::size_t tau = 0; tau <= 6; ++tau) best = std::max(best, std::abs(oracle::caf(x, alpha, fs, tau)));
    CHECK(prof.magnitude_db[0] == doctest::Approx(to_db(best)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(scan_cyclic(r, {}, {0, 1}), ParameterError);
  CHECK_THROWS_AS(scan_cyclic(r, {2.0, 1.0}, {0, 1}), ParameterError);
  const auto g = make_alpha_grid(0.1e6, 2e6, 10e3);
  CHECK(g.size() == 191);
  CHECK(g.back() == doctest::Approx(2e6));
}

TEST_CASE("DSSS chip rate stands out of the cyclic profile") {
  wavegen::ScenarioSpec s;
  s.sample_rate_hz = 8e6;
  s.duration_s = 4e-3;
  wavegen::ChannelSpec c;
  c.symbol_rate_hz = 1e6;
  c.snr_db = 10.0;
  s.channels = {c};
  const auto r = wavegen::compose_scenario(s).recording;
  const double step = 10e3;
  const auto prof = scan_cyclic(r, make_alpha_grid(0.1e6, 2e6, step), {0, 16});
  const auto at = static_cast<std::size_t>(std::lround((1e6 - 0.1e6) / step));
  // magnitude_db is 10 log10 |R|, so 10 dB in power is 5 on this scale
  CHECK(prof.magnitude_db[at] - oracle::median(prof.magnitude_db) >= 5.0);

  const auto ev = cyclic_evidence(prof, {1.0, 1, 1});
  REQUIRE(ev.detected);
  bool near = false;
  for (const auto& p : ev.peaks) near |= std::abs(p.center - 1e6) <= step;
  CHECK(near);
}

TEST_CASE("CP detector on clean OFDM") {
  const auto r = ofdm_recording(60.0, 400, 5);
  const auto e = cp_autocorr_detect(r);
  REQUIRE(e.detected);
  CHECK(e.useful_length == 64);
  CHECK(e.cp_length == 16);

  const auto r8 = ofdm_recording(60.0, 400, 6, 8);
  const auto e8 = cp_autocorr_detect(r8);
  REQUIRE(e8.detected);
  CHECK(e8.useful_length == 64);
  CHECK(e8.cp_length == 8);
}

TEST_CASE("CP detector on noise") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto e = cp_autocorr_detect(rec(wavegen::gen_awgn(80000, 0.0, seed)));
    CHECK_FALSE(e.detected);
  }
}

TEST_CASE("CP detector at 0 dB") {
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto e = cp_autocorr_detect(ofdm_recording(0.0, 1000, seed));
    hits += e.detected && e.useful_length && std::abs(*e.useful_length - 64) <= 1 ? 1 : 0;
  }
  CHECK(hits >= 18);
}

TEST_CASE("matched filter finds the template") {
  Rng rng(4);
  Samples templ(256);
  for (auto& v : templ) v = std::polar(1.0, 2 * std::numbers::pi * rng.uniform());
  int exact = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto x = wavegen::gen_awgn(20000, 5.0, seed);  // unit-power template at -5 dB
    for (std::size_t i = 0; i < templ.size(); ++i) x[5000 + i] += templ[i];
    const auto e = matched_filter_detect(rec(x), templ, 1e-3);
    if (e.detected && std::abs(static_cast<long>(e.peaks[0].start_index) - 5000) <= 1) ++exact;

    // scaling the input moves nothing
    auto y = x;
    for (auto& v : y) v *= 37.5;
    const auto f = matched_filter_detect(rec(y), templ, 1e-3);
    REQUIRE(f.peaks.size() == e.peaks.size());
    for (std::size_t i = 0; i < e.peaks.size(); ++i) CHECK(f.peaks[i].start_index == e.peaks[i].start_index);
  }
  CHECK(exact == 20);
}

TEST_CASE("matched filter degenerate and orthogonal templates") {
  auto x = wavegen::gen_awgn(4000, 0.0, 9);
  x[1234] = {40.0, 0.0};
  const Samples one{{1.0, 0.0}};
  const auto e = matched_filter_detect(rec(x), one, 1e-3);
  REQUIRE(e.detected);
  CHECK(e.peaks[0].start_index == 1234);

  // sliding windows of two DFT-bin tones are orthogonal at every offset
  const std::size_t len = 64;
  Samples tone_a(4096), tone_b(len);
  for (std::size_t t = 0; t < tone_a.size(); ++t) tone_a[t] = std::polar(1.0, 2 * std::numbers::pi * 3.0 * t / len);
  for (std::size_t t = 0; t < len; ++t) tone_b[t] = std::polar(1.0, 2 * std::numbers::pi * 5.0 * t / len);
  CHECK_FALSE(matched_filter_detect(rec(tone_a), tone_b, 1e-3).detected);

  CHECK_THROWS_AS(matched_filter_detect(rec(x), Samples{}, 1e-3), ParameterError);
  CHECK_THROWS_AS(matched_filter_detect(rec(Samples(10)), Samples(11, 1.0), 1e-3), ParameterError);
}

TEST_CASE("spectral template self-match and flat guard") {
  const auto r = rec(wavegen::gen_awgn(8192, 0.0, 12));
  const auto psd = dsp::welch_psd(r, 256);
  const std::vector<double> slice(psd.values_db.begin() + 40, psd.values_db.begin() + 72);
  const auto e = spectral_template_match(psd, slice, 0.99);
  REQUIRE(e.detected);
  CHECK(e.peaks[0].start_index == 40);
  CHECK(e.scores[0] == doctest::Approx(1.0));

  dsp::PowerSpectrum flat;
  flat.values_db.assign(128, -3.0);
  flat.freq_axis = {-64.0, 1.0};
  const auto f = spectral_template_match(flat, std::vector<double>(16, -3.0), 0.5);
  CHECK(f.flat_input);
  CHECK(f.statistic == 0.0);
  CHECK_FALSE(f.detected);
}

TEST_CASE("DSSS mask template finds three carriers") {
  const double fs = 9.8304e6;
  wavegen::ScenarioSpec s;
  s.sample_rate_hz = fs;
  s.duration_s = 10e-3;
  wavegen::ChannelSpec c;
  c.symbol_rate_hz = 1.2288e6;
  c.shaping = wavegen::PulseShape::RootRaisedCosine;
  c.snr_db = 15.0;
  s.channels = {c};
  const auto single = dsp::welch_psd(wavegen::compose_scenario(s).recording, 1024);
  c.carrier_count = 3;
  c.carrier_spacing_hz = 2.5e6;  // at 1.25 MHz the shaped carriers overlap into one flat block
  s.channels = {c};
  s.seed = 9;
  const auto triple = dsp::welch_psd(wavegen::compose_scenario(s).recording, 1024);

  // template: the single carrier with a margin of noise on both sides
  const double step = single.freq_axis.step;
  const auto half = static_cast<std::size_t>(std::lround(1.1e6 / step));
  const std::size_t mid = 512;
  const std::vector<double> templ(single.values_db.begin() + static_cast<long>(mid - half),
                                  single.values_db.begin() + static_cast<long>(mid + half));
  const auto e = spectral_template_match(triple, templ, 0.9);
  CHECK(e.peaks.size() == 3);
  for (double sc : e.scores) CHECK(sc >= 0.9);
}

}  // TEST_SUITE
