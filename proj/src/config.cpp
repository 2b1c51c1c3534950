#include "sigid/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "sigid/error.hpp"

namespace sigid::config {
namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& n, const std::string& msg) const {
    throw ConfigError(source_, line_of(n), msg);
  }

  void require_map(const YAML::Node& n, const std::string& what) const {
    if (!n.IsMap()) fail(n, what + " must be a mapping");
  }

  void allow_keys(const YAML::Node& n, const std::set<std::string>& keys) const {
    for (const auto& kv : n) {
      const auto key = kv.first.as<std::string>();
      if (!keys.count(key)) fail(kv.first, "unknown key '" + key + "'");
    }
  }

  template <typename T>
  T as(const YAML::Node& n, const std::string& key) const {
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, "invalid value for '" + key + "'");
    }
  }

  template <typename T>
  void opt(const YAML::Node& parent, const std::string& key, T& out) const {
    const auto n = parent[key];
    if (n) out = as<T>(n, key);
  }

  template <typename T>
  T req(const YAML::Node& parent, const std::string& key) const {
    const auto n = parent[key];
    if (!n) fail(parent, "missing required key '" + key + "'");
    return as<T>(n, key);
  }

  std::pair<double, double> range(const YAML::Node& parent, const std::string& key) const {
    const auto n = parent[key];
    if (!n) fail(parent, "missing required key '" + key + "'");
    if (!n.IsSequence() || n.size() != 2) fail(n, "'" + key + "' must be a two-element list");
    return {as<double>(n[0], key), as<double>(n[1], key)};
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
};

YAML::Node load_text(const std::string& text, const std::string& source) {
  try {
    return YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source, e.mark.line + 1, e.msg);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

wavegen::ChannelSpec parse_channel(const Reader& r, const YAML::Node& n) {
  r.require_map(n, "channel");
  r.allow_keys(n, {"kind", "center_freq_hz", "snr_db", "symbol_rate_hz", "chip_rate_hz", "bits_per_symbol",
                   "shaping", "rolloff", "rrc_span_symbols", "carrier_count", "carrier_spacing_hz",
                   "useful_length", "cp_length", "active_subcarriers", "modulation_index", "header_len",
                   "header_seed", "bandwidth_hz", "block_len", "bursts", "burst_train"});
  wavegen::ChannelSpec c;
  try {
    c.kind = wavegen::channel_kind_from_string(r.req<std::string>(n, "kind"));
    if (n["shaping"]) c.shaping = wavegen::pulse_shape_from_string(r.as<std::string>(n["shaping"], "shaping"));
  } catch (const ParameterError& e) {
    r.fail(n, e.what());
  }
  r.opt(n, "center_freq_hz", c.center_freq_hz);
  r.opt(n, "snr_db", c.snr_db);
  r.opt(n, "symbol_rate_hz", c.symbol_rate_hz);
  r.opt(n, "chip_rate_hz", c.symbol_rate_hz);
  r.opt(n, "bits_per_symbol", c.bits_per_symbol);
  r.opt(n, "rolloff", c.rolloff);
  r.opt(n, "rrc_span_symbols", c.rrc_span_symbols);
  r.opt(n, "carrier_count", c.carrier_count);
  r.opt(n, "carrier_spacing_hz", c.carrier_spacing_hz);
  r.opt(n, "useful_length", c.useful_length);
  r.opt(n, "cp_length", c.cp_length);
  r.opt(n, "active_subcarriers", c.active_subcarriers);
  r.opt(n, "modulation_index", c.modulation_index);
  r.opt(n, "header_len", c.header_len);
  r.opt(n, "header_seed", c.header_seed);
  r.opt(n, "bandwidth_hz", c.bandwidth_hz);
  r.opt(n, "block_len", c.block_len);
  if (const auto b = n["bursts"]) {
    if (!b.IsSequence()) r.fail(b, "'bursts' must be a list");
    for (const auto& w : b) {
      r.require_map(w, "burst");
      r.allow_keys(w, {"start_s", "duration_s"});
      c.bursts.push_back({r.req<double>(w, "start_s"), r.req<double>(w, "duration_s")});
    }
  }
  if (const auto t = n["burst_train"]) {
    // Periodic schedule shorthand.
    r.require_map(t, "burst_train");
    r.allow_keys(t, {"first_start_s", "period_s", "duration_s", "count"});
    const auto first = r.req<double>(t, "first_start_s");
    const auto period = r.req<double>(t, "period_s");
    const auto duration = r.req<double>(t, "duration_s");
    const auto count = r.req<int>(t, "count");
    if (count < 0 || !(period > 0.0)) r.fail(t, "burst_train needs count >= 0 and period > 0");
    for (int i = 0; i < count; ++i) c.bursts.push_back({first + i * period, duration});
  }
  return c;
}

classify::CandidateSignature parse_candidate(const Reader& r, const YAML::Node& n) {
  r.require_map(n, "candidate");
  r.allow_keys(n, {"label", "bw_hz", "cyclic_features", "burst_header", "preamble_template",
                   "spectral_template", "cyclic_prefix", "useful_length", "cp_length", "carrier_spacing_hz",
                   "preferred_method", "dimension"});
  classify::CandidateSignature c;
  c.label = r.req<std::string>(n, "label");
  std::tie(c.bw_min_hz, c.bw_max_hz) = r.range(n, "bw_hz");
  if (const auto f = n["cyclic_features"]) {
    if (!f.IsSequence()) r.fail(f, "'cyclic_features' must be a list");
    for (const auto& x : f) {
      r.require_map(x, "cyclic feature");
      r.allow_keys(x, {"freq_hz", "tolerance_hz"});
      c.cyclic_features.push_back({r.req<double>(x, "freq_hz"), r.req<double>(x, "tolerance_hz")});
    }
  }
  if (const auto h = n["burst_header"]) {
    r.require_map(h, "burst_header");
    r.allow_keys(h, {"period_hz"});
    c.burst_header_period_hz = r.req<double>(h, "period_hz");
  }
  if (n["preamble_template"]) c.preamble_template_id = r.as<std::string>(n["preamble_template"], "preamble_template");
  if (n["spectral_template"]) c.spectral_template_id = r.as<std::string>(n["spectral_template"], "spectral_template");
  r.opt(n, "cyclic_prefix", c.cyclic_prefix);
  if (n["useful_length"]) c.useful_length = r.as<int>(n["useful_length"], "useful_length");
  if (n["cp_length"]) c.cp_length = r.as<int>(n["cp_length"], "cp_length");
  if (n["carrier_spacing_hz"]) c.carrier_spacing_hz = r.as<double>(n["carrier_spacing_hz"], "carrier_spacing_hz");
  if (n["preferred_method"]) c.preferred_method = r.as<std::string>(n["preferred_method"], "preferred_method");
  r.opt(n, "dimension", c.dimension);
  return c;
}

}  // namespace

wavegen::ScenarioSpec parse_scenario(const std::string& text, const std::string& source) {
  const Reader r(source);
  const auto root = load_text(text, source);
  r.require_map(root, "scenario");
  r.allow_keys(root, {"sample_rate_hz", "center_freq_hz", "duration_s", "noise_power_dbw", "seed",
                      "mask_fft_size", "description", "channels"});
  wavegen::ScenarioSpec s;
  s.sample_rate_hz = r.req<double>(root, "sample_rate_hz");
  s.duration_s = r.req<double>(root, "duration_s");
  r.opt(root, "center_freq_hz", s.center_freq_hz);
  r.opt(root, "noise_power_dbw", s.noise_power_dbw);
  r.opt(root, "seed", s.seed);
  r.opt(root, "mask_fft_size", s.mask_fft_size);
  r.opt(root, "description", s.description);
  if (!(s.sample_rate_hz > 0.0)) r.fail(root["sample_rate_hz"], "sample_rate_hz must be > 0");
  if (!(s.duration_s > 0.0) || s.sample_count() < 1) r.fail(root["duration_s"], "duration_s must cover at least one sample");
  if (const auto chans = root["channels"]) {
    if (!chans.IsSequence()) r.fail(chans, "'channels' must be a list");
    for (const auto& n : chans) {
      auto c = parse_channel(r, n);
      try {
        wavegen::validate(c, s.sample_rate_hz, s.sample_count());
      } catch (const ParameterError& e) {
        r.fail(n, e.what());
      }
      s.channels.push_back(std::move(c));
    }
  }
  try {
    wavegen::validate(s);
  } catch (const ParameterError& e) {
    r.fail(root, e.what());
  }
  return s;
}

wavegen::ScenarioSpec load_scenario(const std::string& path) { return parse_scenario(read_file(path), path); }

classify::ChannelPlan parse_plan(const std::string& text, const std::string& source) {
  const Reader r(source);
  const auto root = load_text(text, source);
  r.require_map(root, "plan");
  r.allow_keys(root, {"templates", "entries"});
  classify::ChannelPlan plan;
  if (const auto t = root["templates"]) {
    r.require_map(t, "templates");
    for (const auto& kv : t) {
      classify::PlanTemplate pt;
      pt.id = kv.first.as<std::string>();
      r.require_map(kv.second, "template '" + pt.id + "'");
      for (const auto& p : kv.second) {
        const auto key = p.first.as<std::string>();
        if (key == "kind")
          pt.kind = r.as<std::string>(p.second, key);
        else
          pt.params[key] = r.as<double>(p.second, key);
      }
      if (pt.kind != "fsk_header" && pt.kind != "dsss_psd")
        r.fail(kv.second, "template '" + pt.id + "' needs kind fsk_header or dsss_psd");
      plan.templates[pt.id] = pt;
    }
  }
  const auto entries = root["entries"];
  if (!entries || !entries.IsSequence()) r.fail(root, "'entries' must be a list");
  for (const auto& n : entries) {
    r.require_map(n, "entry");
    r.allow_keys(n, {"name", "band_hz", "candidates"});
    classify::ChannelPlanEntry e;
    e.name = r.req<std::string>(n, "name");
    std::tie(e.low_hz, e.high_hz) = r.range(n, "band_hz");
    if (const auto cands = n["candidates"]) {
      if (!cands.IsSequence()) r.fail(cands, "'candidates' must be a list");
      for (const auto& c : cands) {
        e.candidates.push_back(parse_candidate(r, c));
        classify::ChannelPlan single{{{e.name, e.low_hz, e.high_hz, {e.candidates.back()}}}, plan.templates};
        try {
          classify::validate_plan(single);
        } catch (const UnsupportedMethodError&) {
          throw;  // reported by the caller with its own exit path
        } catch (const ParameterError& err) {
          r.fail(c, err.what());
        }
      }
    }
    plan.entries.push_back(std::move(e));
  }
  return plan;
}

classify::ChannelPlan load_plan(const std::string& path) { return parse_plan(read_file(path), path); }

pipeline::PipelineConfig parse_pipeline_config(const std::string& text, const std::string& source,
                                               pipeline::PipelineConfig c) {
  const Reader r(source);
  const auto root = load_text(text, source);
  if (root.IsNull()) return c;
  r.require_map(root, "pipeline config");
  r.allow_keys(root, {"fft_size", "window", "overlap", "nfspem", "guard_factor", "burst_detection", "smooth_len",
                      "burst_k", "burst_min_excess_db", "gate_bursts", "no_channelize", "timing", "parallel", "plan",
                      "cyclostationary", "matched_filter", "autocorrelation", "template_matching", "energy"});
  r.opt(root, "fft_size", c.fft_size);
  r.opt(root, "overlap", c.overlap);
  r.opt(root, "guard_factor", c.guard_factor);
  r.opt(root, "smooth_len", c.smooth_len);
  r.opt(root, "burst_k", c.burst_k);
  r.opt(root, "burst_min_excess_db", c.burst_min_excess_db);
  r.opt(root, "gate_bursts", c.gate_bursts);
  r.opt(root, "no_channelize", c.no_channelize);
  r.opt(root, "timing", c.record_timing);
  r.opt(root, "parallel", c.parallel);
  if (const auto w = root["window"]) {
    try {
      c.window = dsp::window_from_string(r.as<std::string>(w, "window"));
    } catch (const ParameterError& e) {
      r.fail(w, e.what());
    }
  }
  if (const auto b = root["burst_detection"]) {
    try {
      c.burst_detection = pipeline::burst_mode_from_string(r.as<std::string>(b, "burst_detection"));
    } catch (const ParameterError& e) {
      r.fail(b, e.what());
    }
  }
  if (const auto p = root["plan"]) {
    std::filesystem::path plan = r.as<std::string>(p, "plan");
    if (plan.is_relative() && source.find('/') != std::string::npos)
      plan = std::filesystem::path(source).parent_path() / plan;
    c.plan_path = plan.string();
  }
  if (const auto n = root["nfspem"]) {
    r.require_map(n, "nfspem");
    r.allow_keys(n, {"k", "min_width", "merge_gap"});
    r.opt(n, "k", c.wideband.k);
    r.opt(n, "min_width", c.wideband.min_width);
    r.opt(n, "merge_gap", c.wideband.merge_gap);
  }
  if (const auto n = root["cyclostationary"]) {
    r.require_map(n, "cyclostationary");
    r.allow_keys(n, {"grid_step_hz", "tau_max", "k", "min_width", "merge_gap", "min_peak_excess_db", "max_carriers"});
    r.opt(n, "grid_step_hz", c.cyclo.grid_step_hz);
    r.opt(n, "tau_max", c.cyclo.tau_max);
    r.opt(n, "k", c.cyclo.peaks.k);
    r.opt(n, "min_width", c.cyclo.peaks.min_width);
    r.opt(n, "merge_gap", c.cyclo.peaks.merge_gap);
    r.opt(n, "min_peak_excess_db", c.cyclo.min_peak_excess_db);
    r.opt(n, "max_carriers", c.cyclo.max_carriers);
  }
  if (const auto n = root["matched_filter"]) {
    r.require_map(n, "matched_filter");
    r.allow_keys(n, {"pfa"});
    r.opt(n, "pfa", c.matched_pfa);
  }
  if (const auto n = root["autocorrelation"]) {
    r.require_map(n, "autocorrelation");
    r.allow_keys(n, {"lag_first", "lag_last", "k", "pfa"});
    r.opt(n, "lag_first", c.autocorr.lag_first);
    r.opt(n, "lag_last", c.autocorr.lag_last);
    r.opt(n, "k", c.autocorr.k);
    r.opt(n, "pfa", c.autocorr.pfa);
  }
  if (const auto n = root["template_matching"]) {
    r.require_map(n, "template_matching");
    r.allow_keys(n, {"min_score"});
    r.opt(n, "min_score", c.template_min_score);
  }
  if (const auto n = root["energy"]) {
    r.require_map(n, "energy");
    r.allow_keys(n, {"pfa"});
    r.opt(n, "pfa", c.energy_pfa);
  }
  try {
    c.validate();
  } catch (const ParameterError& e) {
    r.fail(root, e.what());
  }
  return c;
}

pipeline::PipelineConfig load_pipeline_config(const std::string& path, pipeline::PipelineConfig base) {
  return parse_pipeline_config(read_file(path), path, std::move(base));
}

}  // namespace sigid::config
