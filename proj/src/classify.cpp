#include "sigid/classify.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <set>
#include <tuple>

#include "sigid/error.hpp"
#include "sigid/wavegen.hpp"

namespace sigid::classify {
namespace {

std::string normalize(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == ' ' || c == '-') out.push_back('_');
    else out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

double param(const PlanTemplate& t, const std::string& key, std::optional<double> fallback = {}) {
  const auto it = t.params.find(key);
  if (it != t.params.end()) return it->second;
  if (fallback) return *fallback;
  throw ParameterError("template '" + t.id + "' is missing parameter '" + key + "'");
}

const PlanTemplate& find_template(const ChannelPlan& plan, const std::string& id,
                                  const std::string& kind) {
  const auto it = plan.templates.find(id);
  if (it == plan.templates.end()) throw ParameterError("unknown template '" + id + "'");
  if (it->second.kind != kind)
    throw ParameterError("template '" + id + "' has kind '" + it->second.kind + "', expected '" + kind + "'");
  return it->second;
}

bool strong_enough(const nfspem::DetectedComponent& p, const sensing::Evidence& e,
                   const DecideOptions& opt) {
  return p.peak_value_db - e.threshold >= opt.min_peak_excess_db;
}

std::vector<MatchedFeature> match_cyclic(const CandidateSignature& c, const sensing::Evidence& e,
                                         const DecideOptions& opt) {
  std::vector<MatchedFeature> out;
  for (std::size_t i = 0; i < c.cyclic_features.size(); ++i) {
    const auto& f = c.cyclic_features[i];
    const nfspem::DetectedComponent* best = nullptr;
    for (const auto& p : e.peaks) {
      if (!strong_enough(p, e, opt) || std::abs(p.center - f.freq_hz) > f.tolerance_hz) continue;
      if (!best || std::abs(p.center - f.freq_hz) < std::abs(best->center - f.freq_hz)) best = &p;
    }
    if (best) out.push_back({"cyclic_" + std::to_string(i), f.freq_hz, best->center});
  }
  return out;
}

}  // namespace

const std::vector<MethodInfo>& method_registry() {
  using M = sensing::Method;
  static const std::vector<MethodInfo> rows = {
      {"energy_detection", "Energy Detection", "time/frequency", "signal energy", "Detection Only", M::Energy},
      {"matched_filter", "Matched Filter", "time",
       "time domain signal structure and characteristics: pulse shape, package format, guard time, burst duration",
       "Detection and Identification", M::MatchedFilter},
      {"cyclostationary", "Cyclostationary Feature Detection", "frequency/code",
       "chip rate, data rate, CP size, symbol duration, modulation type, carrier spacing and number",
       "Detection and Identification", M::Cyclo},
      {"statistical_tests", "Statistical Tests", "time", "signal distribution", "Detection Only", std::nullopt},
      {"entropy_based", "Entropy Based", "frequency", "signal entropy", "Detection Only", std::nullopt},
      {"eigenvalue_based", "Eigenvalue Based", "time/angle", "signal eigenvalues, direction of arrival",
       "Detection Only", std::nullopt},
      {"autocorrelation", "Autocorrelation", "time", "cyclic prefix, midamble, preamble, PN sequence and others",
       "Detection and Identification", M::Autocorr},
      {"template_matching", "Template Matching", "frequency", "frequency domain filter characteristics",
       "Detection and Identification", M::TemplateMatch},
      {"multitaper_based", "Multitaper Based", "frequency", "signal energy", "Detection Only", std::nullopt},
      {"wavelet", "Wavelet", "frequency", "signal energy", "Detection Only", std::nullopt},
      {"multiband_joint_detection", "Multiband Joint Detection", "frequency", "signal energy",
       "Detection Only", std::nullopt},
  };
  return rows;
}

const MethodInfo& lookup_method(const std::string& name) {
  const std::string key = normalize(name);
  for (const auto& row : method_registry())
    if (row.name == key || normalize(row.display_name) == key) return row;
  throw ParameterError("unknown sensing method '" + name + "'");
}

Samples preamble_waveform(const PlanTemplate& t, double fs) {
  if (t.kind != "fsk_header") throw ParameterError("template '" + t.id + "' is not a preamble");
  return wavegen::fsk_header_waveform(
      param(t, "symbol_rate_hz"), param(t, "modulation_index", 0.5),
      static_cast<int>(param(t, "header_len", 54.0)),
      static_cast<std::uint64_t>(param(t, "header_seed", 0x5a17)), fs);
}

std::vector<double> spectral_shape(const PlanTemplate& t, double step_hz) {
  if (t.kind != "dsss_psd") throw ParameterError("template '" + t.id + "' is not a spectral template");
  if (!(step_hz > 0.0)) throw ParameterError("spectral_shape: step must be > 0");
  const double chip = param(t, "chip_rate_hz");
  const double span = param(t, "span_hz", 1.5 * chip);
  const double floor_lin = from_db(param(t, "floor_db", -20.0));
  const int carriers = static_cast<int>(param(t, "carriers", 1.0));
  const double spacing = param(t, "carrier_spacing_hz", 0.0);
  auto n = static_cast<std::size_t>(std::llround(span / step_hz));
  if (n % 2 == 0) ++n;
  if (n < 3) throw ParameterError("spectral_shape: span shorter than three bins");
  std::vector<double> out(n);
  const double mid = 0.5 * static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = (static_cast<double>(i) - mid) * step_hz;
    double p = floor_lin;
    for (int k = 0; k < carriers; ++k) {
      const double off = (k - 0.5 * (carriers - 1)) * spacing;
      const double x = std::numbers::pi * (f - off) / chip;
      const double sinc = std::abs(x) < 1e-12 ? 1.0 : std::sin(x) / x;
      p += sinc * sinc;
    }
    out[i] = to_db(p);
  }
  return out;
}

void validate_plan(const ChannelPlan& plan) {
  for (const auto& e : plan.entries) {
    if (!(e.low_hz < e.high_hz)) throw ParameterError("plan entry '" + e.name + "': band needs low < high");
    for (const auto& c : e.candidates) {
      const std::string where = "plan entry '" + e.name + "', candidate '" + c.label + "'";
      if (c.label.empty()) throw ParameterError("plan entry '" + e.name + "': candidate without label");
      if (!(c.bw_min_hz >= 0.0 && c.bw_min_hz <= c.bw_max_hz))
        throw ParameterError(where + ": bandwidth range needs 0 <= min <= max");
      for (const auto& f : c.cyclic_features)
        if (!(f.freq_hz > 0.0) || !(f.tolerance_hz > 0.0))
          throw ParameterError(where + ": cyclic features need positive frequency and tolerance");
      if (c.preamble_template_id) find_template(plan, *c.preamble_template_id, "fsk_header");
      if (c.spectral_template_id) find_template(plan, *c.spectral_template_id, "dsss_psd");
      if (c.preferred_method) {
        const auto& row = lookup_method(*c.preferred_method);
        if (!row.implemented())
          throw UnsupportedMethodError(row.display_name, where + ": method '" + row.display_name +
                                                             "' is listed in the method table but not implemented");
        const bool ok = [&] {
          switch (*row.method) {
            case sensing::Method::Cyclo: return !c.cyclic_features.empty();
            case sensing::Method::MatchedFilter: return c.preamble_template_id.has_value();
            case sensing::Method::Autocorr: return c.cyclic_prefix;
            case sensing::Method::TemplateMatch: return c.spectral_template_id.has_value();
            case sensing::Method::Energy: return true;
          }
          return false;
        }();
        if (!ok) throw ParameterError(where + ": preferred method '" + row.name + "' has no feature to use");
      }
    }
  }
}

std::vector<RankedCandidate> scb_match(double center, double bw, const ChannelPlan& plan) {
  std::vector<RankedCandidate> all;
  for (const auto& e : plan.entries) {
    if (center < e.low_hz || center > e.high_hz) continue;
    for (const auto& c : e.candidates) {
      if (bw < c.bw_min_hz * (1.0 - kBandwidthSlack) || bw > c.bw_max_hz * (1.0 + kBandwidthSlack)) continue;
      all.push_back({e.name, c, std::abs(bw - 0.5 * (c.bw_min_hz + c.bw_max_hz))});
    }
  }
  std::sort(all.begin(), all.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
    return std::tie(a.bw_distance_hz, a.signature.label, a.entry, a.signature.bw_min_hz, a.signature.bw_max_hz) <
           std::tie(b.bw_distance_hz, b.signature.label, b.entry, b.signature.bw_min_hz, b.signature.bw_max_hz);
  });
  std::vector<RankedCandidate> out;
  std::set<std::string> seen;
  for (auto& r : all)
    if (seen.insert(r.signature.label).second) out.push_back(std::move(r));
  return out;
}

sensing::Method ssmsb_select(const CandidateSignature& c) {
  if (c.preferred_method) {
    const auto& row = lookup_method(*c.preferred_method);
    if (!row.implemented())
      throw UnsupportedMethodError(row.display_name, "candidate '" + c.label + "': method '" + row.display_name +
                                                         "' is listed in the method table but not implemented");
    return *row.method;
  }
  if (!c.cyclic_features.empty()) return sensing::Method::Cyclo;
  if (c.preamble_template_id) return sensing::Method::MatchedFilter;
  if (c.cyclic_prefix) return sensing::Method::Autocorr;
  if (c.spectral_template_id) return sensing::Method::TemplateMatch;
  return sensing::Method::Energy;
}

std::string to_string(VerdictKind v) {
  switch (v) {
    case VerdictKind::Identified: return "identified";
    case VerdictKind::DetectedUnidentified: return "detected_unidentified";
    case VerdictKind::LowConfidence: return "low_confidence";
  }
  return "unknown";
}

VerdictKind verdict_from_string(const std::string& name) {
  for (auto v : {VerdictKind::Identified, VerdictKind::DetectedUnidentified, VerdictKind::LowConfidence})
    if (to_string(v) == name) return v;
  throw ParameterError("unknown verdict '" + name + "'");
}

std::pair<double, double> cyclic_search_range(const CandidateSignature& c, double fs, bool widened) {
  if (c.cyclic_features.empty()) throw ParameterError("candidate '" + c.label + "' has no cyclic features");
  double lo = c.cyclic_features.front().freq_hz;
  double hi = lo;
  for (const auto& f : c.cyclic_features) {
    lo = std::min(lo, f.freq_hz);
    hi = std::max(hi, f.freq_hz);
  }
  const double below = widened ? 0.5 : 0.75;
  const double above = widened ? 1.5 : 1.25;
  const double cap = 0.49 * fs;
  return {std::min(lo * below, cap), std::min(hi * above, cap)};
}

Decision decide(const CandidateSignature& c, const sensing::Evidence& evidence, double fs,
                const RescanFn& rescan, const DecideOptions& opt) {
  Decision d;
  d.evidence.push_back(evidence);
  const auto identified = [&](std::vector<MatchedFeature> features) {
    d.kind = VerdictKind::Identified;
    d.label = c.label;
    d.matched_features = std::move(features);
    return d;
  };
  if (evidence.low_confidence) {
    d.kind = VerdictKind::LowConfidence;
    return d;
  }

  switch (evidence.method) {
    case sensing::Method::Cyclo: {
      auto m = match_cyclic(c, evidence, opt);
      if (!m.empty()) return identified(std::move(m));
      if (!rescan) break;
      const auto [lo, hi] = cyclic_search_range(c, fs, true);
      d.evidence.push_back(rescan(lo, hi));
      d.rescanned = true;
      if (d.evidence.back().low_confidence) {
        d.kind = VerdictKind::LowConfidence;
        return d;
      }
      m = match_cyclic(c, d.evidence.back(), opt);
      if (!m.empty()) return identified(std::move(m));
      break;
    }
    case sensing::Method::MatchedFilter:
      if (evidence.detected && !evidence.peaks.empty())
        return identified({{"preamble", 0.0, evidence.peaks.front().center}});
      break;
    case sensing::Method::Autocorr: {
      if (!evidence.detected || !evidence.useful_length || !evidence.cp_length) break;
      const int u = *evidence.useful_length;
      const int cp = *evidence.cp_length;
      if (c.useful_length && std::abs(u - *c.useful_length) > 1) break;
      if (c.cp_length && std::abs(cp - *c.cp_length) > 1) break;
      return identified({{"useful_length", static_cast<double>(c.useful_length.value_or(u)), static_cast<double>(u)},
                         {"cp_length", static_cast<double>(c.cp_length.value_or(cp)), static_cast<double>(cp)}});
    }
    case sensing::Method::TemplateMatch:
      if (evidence.detected && !evidence.scores.empty())
        return identified({{"spectral_template", evidence.threshold,
                            *std::max_element(evidence.scores.begin(), evidence.scores.end())}});
      break;
    case sensing::Method::Energy:
      break;  // detection only
  }
  d.kind = VerdictKind::DetectedUnidentified;
  return d;
}

}  // namespace sigid::classify
