#include <doctest.h>

#include "sigid/config.hpp"
#include "sigid/error.hpp"
#include "sigid/pipeline.hpp"
#include "sigid/report.hpp"
#include "sigid/wavegen.hpp"

using namespace sigid;
using namespace sigid::pipeline;

namespace {

const std::string kConfigs = SIGID_CONFIG_DIR;

const ComponentReport* find_label(const IdentificationReport& r, const std::string& label) {
  for (const auto& c : r.components)
    if (c.label == label) return &c;
  return nullptr;
}

const ComponentReport* nearest(const IdentificationReport& r, double offset_hz) {
  const ComponentReport* best = nullptr;
  for (const auto& c : r.components)
    if (!best || std::abs(c.center_offset_hz - offset_hz) < std::abs(best->center_offset_hz - offset_hz)) best = &c;
  return best;
}

std::size_t identified(const IdentificationReport& r) {
  return static_cast<std::size_t>(std::count_if(r.components.begin(), r.components.end(), [](const ComponentReport& c) {
    return c.verdict == classify::VerdictKind::Identified;
  }));
}

wavegen::ScenarioSpec three_bursts(std::uint64_t seed) {
  wavegen::ScenarioSpec s;
  s.sample_rate_hz = 1e6;
  s.duration_s = 20e-3;
  s.seed = seed;
  wavegen::ChannelSpec c;
  c.kind = wavegen::ChannelKind::PskBurst;
  c.symbol_rate_hz = 250e3;
  c.shaping = wavegen::PulseShape::RootRaisedCosine;
  c.center_freq_hz = 100e3;
  c.snr_db = 10.0;
  c.bursts = {{2e-3, 3e-3}, {8e-3, 4e-3}, {15e-3, 2e-3}};
  s.channels = {c};
  return s;
}

struct Composite {
  IqRecording rec;
  classify::ChannelPlan plan;
};

const Composite& composite() {
  static const Composite f{wavegen::compose_scenario(config::load_scenario(kConfigs + "/ism_composite.scenario")).recording,
                      config::load_plan(kConfigs + "/ism_2400.plan")};
  return f;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config validation") {
  PipelineConfig c;
  CHECK_NOTHROW(c.validate());
  c.fft_size = 1000;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = {};
  c.wideband.k = 1.5;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = {};
  c.smooth_len = 0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  CHECK(burst_mode_from_string(to_string(BurstMode::On)) == BurstMode::On);
}

TEST_CASE("pure noise yields no identification") {
  const auto plan = config::load_plan(kConfigs + "/ism_2400.plan");
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    wavegen::ScenarioSpec s;
    s.sample_rate_hz = 20e6;
    s.center_freq_hz = 2.44e9;
    s.duration_s = 2e-3;
    s.seed = seed;
    const auto r = run_identification(wavegen::compose_scenario(s).recording, plan, {});
    CHECK(identified(r) == 0);
  }
}

TEST_CASE("composite scenario with channelization") {
  const auto& f = composite();
  const auto r = run_identification(f.rec, f.plan, {});
  const auto* bt = find_label(r, "bluetooth_br");
  REQUIRE(bt != nullptr);
  CHECK(bt->center_offset_hz == doctest::Approx(2e6).epsilon(0.05));
  REQUIRE(!bt->matched_features.empty());
  CHECK(bt->matched_features[0].observed == doctest::Approx(1e6).epsilon(0.01));
  CHECK(bt->burst_detection_ran);
  CHECK(bt->bursts.size() == 15);
  CHECK(find_label(r, "ofdm_narrow") != nullptr);
  CHECK(find_label(r, "dsss_2mcps") != nullptr);
}

TEST_CASE("composite scenario without channelization") {
  const auto& f = composite();
  PipelineConfig c;
  c.no_channelize = true;
  const auto r = run_identification(f.rec, f.plan, c);
  CHECK(find_label(r, "bluetooth_br") == nullptr);
  const auto* fsk = nearest(r, 2e6);
  REQUIRE(fsk != nullptr);
  CHECK(std::abs(fsk->center_offset_hz - 2e6) < 0.2e6);
  CHECK(fsk->verdict == classify::VerdictKind::DetectedUnidentified);
}

TEST_CASE("three-carrier DSSS") {
  const auto rec = wavegen::compose_scenario(config::load_scenario(kConfigs + "/pcs_cdma3x.scenario")).recording;
  const auto plan = config::load_plan(kConfigs + "/pcs_1900.plan");
  const auto r = run_identification(rec, plan, {});
  const auto* c = find_label(r, "cdma_3x");
  REQUIRE(c != nullptr);
  REQUIRE(c->carrier_count);
  CHECK(*c->carrier_count == 3);
  bool chip = false, spacing = false;
  for (const auto& m : c->matched_features) {
    chip |= m.name.rfind("cyclic", 0) == 0 && std::abs(m.observed - 1.2288e6) < 2e3;
    spacing |= m.name == "carrier_spacing" && std::abs(m.observed - 1.25e6) < 10e3;
  }
  CHECK(chip);
  CHECK(spacing);
}

TEST_CASE("burst detection on three bursts") {
  const std::size_t len = 64;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto sc = wavegen::compose_scenario(three_bursts(seed));
    const auto d = detect_bursts(sc.recording, len);
    const auto& truth = sc.truth.burst_intervals[0];
    REQUIRE(d.bursts.size() == 3);
    CHECK_FALSE(d.continuous);
    for (std::size_t i = 0; i < 3; ++i) {
      const long start = std::lround(d.bursts[i].start_s * 1e6);
      const long dur = std::lround(d.bursts[i].duration_s * 1e6);
      CHECK(std::labs(start - static_cast<long>(truth[i].start_sample)) <= static_cast<long>(len));
      CHECK(std::labs(dur - static_cast<long>(truth[i].length)) <= static_cast<long>(2 * len));
    }
  }
}

TEST_CASE("continuous, silent and empty inputs") {
  IqRecording tone;
  tone.sample_rate_hz = 1e6;
  tone.samples.assign(5000, Complex{0.5, 0.5});
  auto d = detect_bursts(tone, 64);
  CHECK(d.continuous);
  CHECK(d.bursts.empty());

  IqRecording quiet = tone;
  std::fill(quiet.samples.begin(), quiet.samples.end(), Complex{});
  d = detect_bursts(quiet, 64);
  CHECK(d.silent);
  CHECK(d.bursts.empty());

  CHECK_THROWS_AS(detect_bursts(IqRecording{}, 64), EmptyInputError);
}

TEST_CASE("gating zeroes everything outside bursts") {
  auto rec = wavegen::compose_scenario(three_bursts(3)).recording;
  const auto d = detect_bursts(rec, 64);
  gate_to_bursts(rec, d);
  std::size_t kept = 0;
  for (const auto& v : rec.samples) kept += v != Complex{} ? 1 : 0;
  std::size_t expected = 0;
  for (const auto& c : d.components) expected += c.end_index - c.start_index + 1;
  CHECK(kept == expected);
}

TEST_CASE("deterministic reports that round-trip") {
  const auto& f = composite();
  const auto a = report::serialize(run_identification(f.rec, f.plan, {}));
  const auto b = report::serialize(run_identification(f.rec, f.plan, {}));
  CHECK(a == b);
  CHECK(report::serialize(report::parse(a)) == a);
  CHECK(a.find("timing") == std::string::npos);

  PipelineConfig par;
  par.parallel = true;
  CHECK(report::serialize(run_identification(f.rec, f.plan, par)) == a);

  PipelineConfig timed;
  timed.record_timing = true;
  const auto t = run_identification(f.rec, f.plan, timed);
  CHECK(t.timing_s.count("psd") == 1);
  CHECK(report::serialize(report::parse(report::serialize(t))) == report::serialize(t));

  CHECK_THROWS_AS(report::parse("{"), FormatError);
  CHECK_THROWS_AS(report::parse("[]"), FormatError);
}

TEST_CASE("a failing component leaves the others alone") {
  const auto& f = composite();
  const auto base = run_identification(f.rec, f.plan, {});
  auto plan = f.plan;
  for (auto& e : plan.entries)
    for (auto& c : e.candidates)
      if (c.label == "ofdm_narrow") c.preferred_method = "Wavelet";
  const auto broken = run_identification(f.rec, plan, {});
  REQUIRE(broken.components.size() == base.components.size());
  for (std::size_t i = 0; i < base.components.size(); ++i) {
    const auto& b = base.components[i];
    if (b.label == "ofdm_narrow") {
      CHECK(broken.components[i].error.has_value());
      continue;
    }
    CHECK(broken.components[i].verdict == b.verdict);
    CHECK(broken.components[i].label == b.label);
  }
}

TEST_CASE("short recordings are rejected") {
  IqRecording r;
  r.samples.assign(100, Complex{1.0, 0.0});
  CHECK_THROWS_AS(run_identification(r, {}, {}), InsufficientDataError);
}

}  // TEST_SUITE
