#include "sigid/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include "sigid/error.hpp"

namespace sigid::pipeline {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

EvidenceSummary summarize(const std::string& candidate, const sensing::Evidence& e, bool rescan) {
  EvidenceSummary s;
  s.candidate = candidate;
  s.method = sensing::to_string(e.method);
  s.statistic = e.statistic;
  s.threshold = e.threshold;
  s.detected = e.detected;
  s.low_confidence = e.low_confidence;
  s.peak_count = e.peaks.size();
  s.rescan = rescan;
  s.useful_length = e.useful_length;
  s.cp_length = e.cp_length;
  return s;
}

struct Context {
  const IqRecording& iq;
  const classify::ChannelPlan& plan;
  const PipelineConfig& cfg;
  const dsp::PowerSpectrum& psd;
  const nfspem::Detection& wide;
};

// Per-sample noise variance from the PSD bins labeled noise (white-noise
// normalization makes every bin read the per-sample variance).
double noise_variance(const Context& ctx) {
  double sum = 0.0;
  std::size_t count = 0;
  for (double v : ctx.psd.values_db)
    if (!(v > ctx.wide.estimate.threshold_db)) {
      sum += from_db(v);
      ++count;
    }
  return count ? sum / static_cast<double>(count) : from_db(ctx.wide.estimate.threshold_db);
}

std::vector<double> cyclic_grid(double lo, double hi, const IqRecording& chan, const CycloConfig& cfg) {
  const double step = cfg.grid_step_hz > 0.0 ? cfg.grid_step_hz
                                             : chan.sample_rate_hz / static_cast<double>(chan.size());
  return sensing::make_alpha_grid(lo, hi, step);
}

sensing::TauRange cyclic_taus(const IqRecording& chan, const CycloConfig& cfg) {
  return {0, std::min(cfg.tau_max, chan.size() / 4)};
}

struct CarrierEstimate {
  int count = 1;
  std::optional<double> spacing_hz;  // strongest cyclic line near the first multiple
};

// 1 + the number of consecutive multiples k * spacing carrying a cyclic
// feature at least min_peak_excess_db above the profile threshold.
CarrierEstimate count_carriers(const IqRecording& chan, double spacing, double threshold_db, double step,
                               const CycloConfig& cfg) {
  CarrierEstimate est;
  const auto taus = cyclic_taus(chan, cfg);
  for (std::size_t k = 1; k < cfg.max_carriers; ++k) {
    const double alpha = static_cast<double>(k) * spacing;
    if (alpha + step >= 0.49 * chan.sample_rate_hz) break;
    double best = 0.0;
    double best_alpha = alpha;
    for (double a : {alpha - step, alpha, alpha + step})
      for (const auto& v : sensing::cyclic_autocorrelation(chan, a, taus).values)
        if (std::abs(v) > best) {
          best = std::abs(v);
          best_alpha = a;
        }
    if (to_db(best) - threshold_db < cfg.min_peak_excess_db) break;
    if (k == 1) est.spacing_hz = best_alpha;
    ++est.count;
  }
  return est;
}

void process_component(const Context& ctx, const nfspem::DetectedComponent& comp, ComponentReport& out,
                       std::optional<sensing::CyclicProfile>& profile_out,
                       std::optional<dsp::Envelope>& envelope_out) {
  const auto& cfg = ctx.cfg;
  out.start_bin = comp.start_index;
  out.end_bin = comp.end_index;
  out.center_offset_hz = comp.center;
  out.center_hz = ctx.iq.center_freq_hz + comp.center;
  out.bandwidth_hz = comp.width;
  out.peak_db = comp.peak_value_db;
  out.mean_excess_db = comp.mean_excess_db;
  out.channel_rate_hz = ctx.iq.sample_rate_hz;

  const auto ranked = classify::scb_match(out.center_hz, comp.width, ctx.plan);
  for (const auto& r : ranked) out.candidates.push_back(r.signature.label);
  if (ranked.empty()) return;

  auto t0 = Clock::now();
  IqRecording chan = cfg.no_channelize ? ctx.iq : dsp::channelize(ctx.iq, comp, {cfg.guard_factor});
  out.channel_rate_hz = chan.sample_rate_hz;
  if (cfg.record_timing) out.timing_s["channelize"] = seconds_since(t0);

  const bool want_bursts = cfg.burst_detection == BurstMode::On ||
                           (cfg.burst_detection == BurstMode::Auto &&
                            ranked.front().signature.burst_header_period_hz.has_value());
  if (want_bursts) {
    t0 = Clock::now();
    out.burst_detection_ran = true;
    const auto bd = detect_bursts(chan, cfg.smooth_len, cfg.burst_k, cfg.burst_min_excess_db);
    out.bursts = bd.bursts;
    out.continuous = bd.continuous;
    envelope_out = dsp::power_envelope(chan, cfg.smooth_len);
    if (cfg.gate_bursts) gate_to_bursts(chan, bd);
    if (cfg.record_timing) out.timing_s["burst_detection"] = seconds_since(t0);
  }

  t0 = Clock::now();
  bool have_first = false;
  for (const auto& cand : ranked) {
    const auto& sig = cand.signature;
    const auto method = classify::ssmsb_select(sig);
    sensing::Evidence ev;
    classify::RescanFn rescan;
    double cyclic_step = 0.0;
    switch (method) {
      case sensing::Method::Cyclo: {
        const auto [lo, hi] = classify::cyclic_search_range(sig, chan.sample_rate_hz, false);
        const auto grid = cyclic_grid(lo, hi, chan, cfg.cyclo);
        cyclic_step = grid.size() > 1 ? grid[1] - grid[0] : chan.sample_rate_hz / static_cast<double>(chan.size());
        auto profile = sensing::scan_cyclic(chan, grid, cyclic_taus(chan, cfg.cyclo));
        ev = sensing::cyclic_evidence(profile, cfg.cyclo.peaks);
        if (!have_first) profile_out = std::move(profile);
        rescan = [&chan, &cfg, &profile_out, have_first](double wlo, double whi) {
          auto p = sensing::scan_cyclic(chan, cyclic_grid(wlo, whi, chan, cfg.cyclo), cyclic_taus(chan, cfg.cyclo));
          auto e = sensing::cyclic_evidence(p, cfg.cyclo.peaks);
          if (!have_first) profile_out = std::move(p);
          return e;
        };
        break;
      }
      case sensing::Method::MatchedFilter: {
        const auto& tmpl = ctx.plan.templates.at(*sig.preamble_template_id);
        const auto wave = classify::preamble_waveform(tmpl, chan.sample_rate_hz);
        ev = sensing::matched_filter_detect(chan, wave, cfg.matched_pfa);
        break;
      }
      case sensing::Method::Autocorr:
        ev = sensing::cp_autocorr_detect(chan, cfg.autocorr);
        break;
      case sensing::Method::TemplateMatch: {
        const auto& tmpl = ctx.plan.templates.at(*sig.spectral_template_id);
        const auto shape = classify::spectral_shape(tmpl, ctx.psd.freq_axis.step);
        ev = sensing::spectral_template_match(ctx.psd, shape, cfg.template_min_score);
        // Only matches centered on this component count.
        const double half = 0.5 * comp.width + ctx.psd.freq_axis.step;
        std::vector<nfspem::DetectedComponent> peaks;
        std::vector<double> scores;
        for (std::size_t i = 0; i < ev.peaks.size(); ++i)
          if (std::abs(ev.peaks[i].center - comp.center) <= half) {
            peaks.push_back(ev.peaks[i]);
            scores.push_back(ev.scores[i]);
          }
        ev.peaks = std::move(peaks);
        ev.scores = std::move(scores);
        ev.detected = !ev.peaks.empty();
        break;
      }
      case sensing::Method::Energy: {
        double var = noise_variance(ctx);
        if (!cfg.no_channelize)
          var *= std::min(1.0, comp.width * cfg.guard_factor / ctx.iq.sample_rate_hz);
        ev = sensing::energy_detect(chan, var, cfg.energy_pfa);
        break;
      }
    }

    const auto decision = classify::decide(sig, ev, chan.sample_rate_hz, rescan, {cfg.cyclo.min_peak_excess_db});
    for (std::size_t i = 0; i < decision.evidence.size(); ++i)
      out.evidence.push_back(summarize(sig.label, decision.evidence[i], i > 0));

    const bool identified = decision.kind == classify::VerdictKind::Identified;
    if (!have_first || identified) {
      out.method = sensing::to_string(method);
      out.verdict = decision.kind;
      out.label = decision.label;
      out.matched_features = decision.matched_features;
      have_first = true;
    }
    if (identified) {
      if (method == sensing::Method::Cyclo && sig.carrier_spacing_hz) {
        const auto carriers = count_carriers(chan, *sig.carrier_spacing_hz, decision.evidence.back().threshold,
                                             cyclic_step, cfg.cyclo);
        out.carrier_count = carriers.count;
        if (carriers.spacing_hz)
          out.matched_features.push_back({"carrier_spacing", *sig.carrier_spacing_hz, *carriers.spacing_hz});
      }
      break;
    }
  }
  if (cfg.record_timing) out.timing_s["sensing"] = seconds_since(t0);
}

}  // namespace

std::string to_string(BurstMode m) {
  switch (m) {
    case BurstMode::Auto: return "auto";
    case BurstMode::On: return "on";
    case BurstMode::Off: return "off";
  }
  return "unknown";
}

BurstMode burst_mode_from_string(const std::string& name) {
  for (auto m : {BurstMode::Auto, BurstMode::On, BurstMode::Off})
    if (to_string(m) == name) return m;
  throw ParameterError("unknown burst detection mode '" + name + "'");
}

void PipelineConfig::validate() const {
  if (fft_size < 8 || (fft_size & (fft_size - 1)) != 0)
    throw ParameterError("fft_size must be a power of two >= 8");
  if (!(overlap >= 0.0 && overlap < 1.0)) throw ParameterError("overlap must be in [0, 1)");
  for (double k : {wideband.k, cyclo.peaks.k, burst_k, autocorr.k})
    if (!(k > 0.0 && k <= 1.0)) throw ParameterError("k must be in (0, 1]");
  if (!(guard_factor > 0.0)) throw ParameterError("guard_factor must be > 0");
  if (smooth_len < 1) throw ParameterError("smooth_len must be >= 1");
  if (!(burst_min_excess_db >= 0.0)) throw ParameterError("burst_min_excess_db must be >= 0");
  if (cyclo.grid_step_hz < 0.0) throw ParameterError("cyclic grid step must be >= 0");
  for (double p : {matched_pfa, autocorr.pfa})
    if (!(p > 0.0 && p < 1.0)) throw ParameterError("pfa must be in (0, 1)");
  if (!(energy_pfa > 0.0 && energy_pfa < 0.5)) throw ParameterError("energy pfa must be in (0, 0.5)");
  if (!(template_min_score > -1.0 && template_min_score <= 1.0))
    throw ParameterError("template min score must be in (-1, 1]");
  if (autocorr.lag_first > autocorr.lag_last) throw ParameterError("autocorrelation lag range is empty");
}

void gate_to_bursts(IqRecording& channel, const BurstDetection& detection) {
  if (detection.components.empty()) return;
  std::vector<bool> keep(channel.size(), false);
  for (const auto& c : detection.components)
    std::fill(keep.begin() + static_cast<long>(c.start_index), keep.begin() + static_cast<long>(c.end_index) + 1,
              true);
  for (std::size_t t = 0; t < channel.size(); ++t)
    if (!keep[t]) channel.samples[t] = Complex{};
}

BurstDetection detect_bursts(const IqRecording& channel, std::size_t smooth_len, double k,
                             double min_excess_db) {
  if (channel.samples.empty()) throw EmptyInputError("detect_bursts: empty input");
  BurstDetection out;
  const auto env = dsp::power_envelope(channel, smooth_len);
  const auto& db = env.values_db;
  const double floor_db = to_db(0.0);
  out.silent = std::all_of(db.begin(), db.end(), [&](double v) { return v <= floor_db; });
  if (out.silent) return out;
  nfspem::Detection det;
  try {
    det = nfspem::nfspem_detect(db, {0.0, 1.0}, {k, smooth_len, smooth_len});
  } catch (const DegenerateSpectrumError&) {
    out.continuous = true;
    return out;
  }

  // The NFSPEM threshold sits in the upper tail of the noise cluster, so its
  // runs include noise excursions and start early. Keep runs whose median
  // clears the floor, and put the edges where the envelope crosses halfway (in
  // linear power) between floor and burst level: a centered moving average
  // crosses that level at the true edge.
  double noise = 0.0;
  std::size_t noise_count = 0;
  for (double v : db)
    if (v <= det.estimate.threshold_db) {
      noise += from_db(v);
      ++noise_count;
    }
  noise = noise_count ? noise / static_cast<double>(noise_count) : 0.0;

  const std::size_t n = db.size();
  std::vector<nfspem::DetectedComponent> refined;
  for (const auto& c : det.components) {
    std::vector<double> inside(db.begin() + static_cast<long>(c.start_index),
                               db.begin() + static_cast<long>(c.end_index) + 1);
    std::nth_element(inside.begin(), inside.begin() + static_cast<long>(inside.size() / 2), inside.end());
    const double level = from_db(inside[inside.size() / 2]);
    if (to_db(level) - to_db(noise) < min_excess_db) continue;
    const double mid_db = to_db((noise + level) / 2.0);
    std::size_t s = c.start_index;
    while (s < c.end_index && db[s] < mid_db) ++s;
    while (s > 0 && db[s - 1] >= mid_db) --s;
    std::size_t e = c.end_index;
    while (e > s && db[e] < mid_db) --e;
    while (e + 1 < n && db[e + 1] >= mid_db) ++e;
    if (!refined.empty() && s <= refined.back().end_index + 1) {
      refined.back().end_index = std::max(refined.back().end_index, e);
      continue;
    }
    nfspem::DetectedComponent r = c;
    r.start_index = s;
    r.end_index = e;
    refined.push_back(r);
  }

  const double dt = 1.0 / channel.sample_rate_hz;
  for (auto& c : refined) {
    double power = 0.0;
    double weighted = 0.0;
    double peak = floor_db;
    double excess = 0.0;
    for (std::size_t t = c.start_index; t <= c.end_index; ++t) {
      power += std::norm(channel.samples[t]);
      weighted += from_db(db[t]) * static_cast<double>(t);
      peak = std::max(peak, db[t]);
      excess += db[t] - det.estimate.threshold_db;
    }
    const auto len = static_cast<double>(c.end_index - c.start_index + 1);
    double env_power = 0.0;
    for (std::size_t t = c.start_index; t <= c.end_index; ++t) env_power += from_db(db[t]);
    c.center = weighted / env_power;
    c.width = len;
    c.peak_value_db = peak;
    c.mean_excess_db = excess / len;
    out.bursts.push_back({static_cast<double>(c.start_index) * dt, len * dt, to_db(power / len)});
  }
  out.components = std::move(refined);
  return out;
}

IdentificationReport run_identification(const IqRecording& iq, const classify::ChannelPlan& plan,
                                        const PipelineConfig& cfg, Artifacts* artifacts) {
  cfg.validate();
  if (iq.size() < cfg.fft_size) throw InsufficientDataError("recording shorter than fft_size");

  IdentificationReport rep;
  rep.sample_rate_hz = iq.sample_rate_hz;
  rep.center_freq_hz = iq.center_freq_hz;
  rep.sample_count = iq.size();
  rep.description = iq.description;
  rep.fft_size = cfg.fft_size;
  rep.window = dsp::to_string(cfg.window);
  rep.overlap = cfg.overlap;

  auto t0 = Clock::now();
  const auto psd = dsp::welch_psd(iq, cfg.fft_size, cfg.window, cfg.overlap);
  if (cfg.record_timing) rep.timing_s["psd"] = seconds_since(t0);
  t0 = Clock::now();
  const auto wide = nfspem::nfspem_detect(psd.values_db, psd.freq_axis, cfg.wideband);
  if (cfg.record_timing) rep.timing_s["wideband_sensing"] = seconds_since(t0);
  rep.averaging_count = psd.averaging_count;
  rep.noise_floor = {wide.histogram.level_count, wide.histogram.level_width, wide.estimate.change_level,
                     wide.estimate.threshold_db, wide.estimate.low_confidence};

  const std::size_t n = wide.components.size();
  rep.components.resize(n);
  std::vector<std::optional<sensing::CyclicProfile>> profiles(n);
  std::vector<std::optional<dsp::Envelope>> envelopes(n);
  const Context ctx{iq, plan, cfg, psd, wide};

  const auto work = [&](std::size_t i) {
    rep.components[i].index = i;
    try {
      process_component(ctx, wide.components[i], rep.components[i], profiles[i], envelopes[i]);
    } catch (const std::exception& e) {
      rep.components[i].error = e.what();
    }
  };

  t0 = Clock::now();
  if (cfg.parallel && n > 1) {
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n; i += workers) work(i);
      });
    for (auto& th : pool) th.join();
  } else {
    for (std::size_t i = 0; i < n; ++i) work(i);
  }
  if (cfg.record_timing) rep.timing_s["identification"] = seconds_since(t0);

  if (artifacts) {
    artifacts->psd = psd;
    artifacts->cyclic = std::move(profiles);
    artifacts->envelopes = std::move(envelopes);
  }
  return rep;
}

}  // namespace sigid::pipeline
