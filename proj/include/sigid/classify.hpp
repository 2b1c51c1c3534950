#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sigid/nfspem.hpp"
#include "sigid/sensing.hpp"
#include "sigid/types.hpp"

namespace sigid::classify {

/// One row of the sensing-method table. Rows without an algorithm behind them
/// are metadata only.
struct MethodInfo {
  std::string name;  // registry key, e.g. "cyclostationary"
  std::string display_name;
  std::string dimension;
  std::string sensing_parameter;
  std::string result;
  std::optional<sensing::Method> method;  // empty when not implemented

  bool implemented() const { return method.has_value(); }
};

const std::vector<MethodInfo>& method_registry();

/// Case, space and hyphen insensitive lookup; throws ParameterError if absent.
const MethodInfo& lookup_method(const std::string& name);

struct CyclicFeature {
  double freq_hz = 0.0;
  double tolerance_hz = 0.0;
};

struct CandidateSignature {
  std::string label;
  double bw_min_hz = 0.0;
  double bw_max_hz = 0.0;
  std::vector<CyclicFeature> cyclic_features;
  std::optional<double> burst_header_period_hz;  // bursty air interface with a fixed header
  std::optional<std::string> preamble_template_id;
  std::optional<std::string> spectral_template_id;
  bool cyclic_prefix = false;  // CP / midamble repetition
  std::optional<int> useful_length;
  std::optional<int> cp_length;
  std::optional<double> carrier_spacing_hz;  // multi-carrier: enables carrier counting
  std::optional<std::string> preferred_method;
  std::string dimension;
};

struct ChannelPlanEntry {
  std::string name;
  double low_hz = 0.0;
  double high_hz = 0.0;
  std::vector<CandidateSignature> candidates;
};

/// Parametric waveform or spectral template referenced by candidates.
struct PlanTemplate {
  std::string id;
  std::string kind;  // "fsk_header" or "dsss_psd"
  std::map<std::string, double> params;
};

struct ChannelPlan {
  std::vector<ChannelPlanEntry> entries;
  std::map<std::string, PlanTemplate> templates;
};

/// Complex-baseband preamble at the given sample rate ("fsk_header").
Samples preamble_waveform(const PlanTemplate& t, double sample_rate_hz);

/// dB spectral shape sampled at step_hz, centered on the template's middle
/// bin ("dsss_psd").
std::vector<double> spectral_shape(const PlanTemplate& t, double step_hz);

/// Throws ParameterError for malformed entries, missing template references
/// and unknown method names; UnsupportedMethodError for a preferred method
/// with no algorithm.
void validate_plan(const ChannelPlan& plan);

struct RankedCandidate {
  std::string entry;
  CandidateSignature signature;
  double bw_distance_hz = 0.0;
};

inline constexpr double kBandwidthSlack = 0.25;

/// Candidates whose entry band contains the absolute center and whose
/// bandwidth range (with 25% slack) contains the estimate, closest bandwidth
/// midpoint first, one per label.
std::vector<RankedCandidate> scb_match(double center_abs_hz, double bandwidth_hz,
                                       const ChannelPlan& plan);

sensing::Method ssmsb_select(const CandidateSignature& candidate);

enum class VerdictKind { Identified, DetectedUnidentified, LowConfidence };

std::string to_string(VerdictKind v);
VerdictKind verdict_from_string(const std::string& name);

struct MatchedFeature {
  std::string name;
  double expected = 0.0;
  double observed = 0.0;
};

struct Decision {
  VerdictKind kind = VerdictKind::DetectedUnidentified;
  std::string label;  // candidate label when Identified
  std::vector<MatchedFeature> matched_features;
  std::vector<sensing::Evidence> evidence;
  bool rescanned = false;
};

struct DecideOptions {
  double min_peak_excess_db = 6.0;  // cyclic peak prominence over the NFSPEM threshold
};

/// Widened re-run of the cyclic scan, over [lo_hz, hi_hz].
using RescanFn = std::function<sensing::Evidence(double lo_hz, double hi_hz)>;

/// Cyclic search interval for a candidate, clamped to (0, 0.49 fs).
std::pair<double, double> cyclic_search_range(const CandidateSignature& candidate,
                                              double sample_rate_hz, bool widened);

Decision decide(const CandidateSignature& candidate, const sensing::Evidence& evidence,
                double sample_rate_hz, const RescanFn& rescan = {},
                const DecideOptions& options = {});

}  // namespace sigid::classify
