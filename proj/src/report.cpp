#include "sigid/report.hpp"

#include <nlohmann/json.hpp>

#include "sigid/error.hpp"

namespace sigid::report {
namespace {

using json = nlohmann::ordered_json;

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  j[key] = v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> get_optional(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

json timing_json(const std::map<std::string, double>& t) {
  json j = json::object();
  for (const auto& [k, v] : t) j[k] = v;
  return j;
}

std::map<std::string, double> timing_from(const json& j) {
  std::map<std::string, double> out;
  if (!j.contains("timing_s")) return out;
  for (const auto& [k, v] : j.at("timing_s").items()) out[k] = v.get<double>();
  return out;
}

json component_json(const pipeline::ComponentReport& c) {
  json j;
  j["index"] = c.index;
  j["start_bin"] = c.start_bin;
  j["end_bin"] = c.end_bin;
  j["center_offset_hz"] = c.center_offset_hz;
  j["center_hz"] = c.center_hz;
  j["bandwidth_hz"] = c.bandwidth_hz;
  j["peak_db"] = c.peak_db;
  j["mean_excess_db"] = c.mean_excess_db;
  j["channel_rate_hz"] = c.channel_rate_hz;
  j["candidates"] = c.candidates;
  j["method"] = c.method;
  j["verdict"] = classify::to_string(c.verdict);
  j["label"] = c.label;
  json features = json::array();
  for (const auto& f : c.matched_features)
    features.push_back({{"name", f.name}, {"expected", f.expected}, {"observed", f.observed}});
  j["matched_features"] = features;
  put_optional(j, "carrier_count", c.carrier_count);
  j["burst_detection_ran"] = c.burst_detection_ran;
  j["continuous"] = c.continuous;
  json bursts = json::array();
  for (const auto& b : c.bursts)
    bursts.push_back({{"start_s", b.start_s}, {"duration_s", b.duration_s}, {"mean_power_db", b.mean_power_db}});
  j["bursts"] = bursts;
  json evidence = json::array();
  for (const auto& e : c.evidence) {
    json x;
    x["candidate"] = e.candidate;
    x["method"] = e.method;
    x["statistic"] = e.statistic;
    x["threshold"] = e.threshold;
    x["detected"] = e.detected;
    x["low_confidence"] = e.low_confidence;
    x["peak_count"] = e.peak_count;
    x["rescan"] = e.rescan;
    put_optional(x, "useful_length", e.useful_length);
    put_optional(x, "cp_length", e.cp_length);
    evidence.push_back(x);
  }
  j["evidence"] = evidence;
  put_optional(j, "error", c.error);
  if (!c.timing_s.empty()) j["timing_s"] = timing_json(c.timing_s);
  return j;
}

pipeline::ComponentReport component_from(const json& j) {
  pipeline::ComponentReport c;
  c.index = j.at("index").get<std::size_t>();
  c.start_bin = j.at("start_bin").get<std::size_t>();
  c.end_bin = j.at("end_bin").get<std::size_t>();
  c.center_offset_hz = j.at("center_offset_hz").get<double>();
  c.center_hz = j.at("center_hz").get<double>();
  c.bandwidth_hz = j.at("bandwidth_hz").get<double>();
  c.peak_db = j.at("peak_db").get<double>();
  c.mean_excess_db = j.at("mean_excess_db").get<double>();
  c.channel_rate_hz = j.at("channel_rate_hz").get<double>();
  c.candidates = j.at("candidates").get<std::vector<std::string>>();
  c.method = j.at("method").get<std::string>();
  c.verdict = classify::verdict_from_string(j.at("verdict").get<std::string>());
  c.label = j.at("label").get<std::string>();
  for (const auto& f : j.at("matched_features"))
    c.matched_features.push_back({f.at("name").get<std::string>(), f.at("expected").get<double>(),
                                  f.at("observed").get<double>()});
  c.carrier_count = get_optional<int>(j, "carrier_count");
  c.burst_detection_ran = j.at("burst_detection_ran").get<bool>();
  c.continuous = j.at("continuous").get<bool>();
  for (const auto& b : j.at("bursts"))
    c.bursts.push_back({b.at("start_s").get<double>(), b.at("duration_s").get<double>(),
                        b.at("mean_power_db").get<double>()});
  for (const auto& x : j.at("evidence")) {
    pipeline::EvidenceSummary e;
    e.candidate = x.at("candidate").get<std::string>();
    e.method = x.at("method").get<std::string>();
    e.statistic = x.at("statistic").get<double>();
    e.threshold = x.at("threshold").get<double>();
    e.detected = x.at("detected").get<bool>();
    e.low_confidence = x.at("low_confidence").get<bool>();
    e.peak_count = x.at("peak_count").get<std::size_t>();
    e.rescan = x.at("rescan").get<bool>();
    e.useful_length = get_optional<int>(x, "useful_length");
    e.cp_length = get_optional<int>(x, "cp_length");
    c.evidence.push_back(e);
  }
  c.error = get_optional<std::string>(j, "error");
  c.timing_s = timing_from(j);
  return c;
}

}  // namespace

std::string serialize(const pipeline::IdentificationReport& r) {
  json j;
  j["recording"] = {{"sample_rate_hz", r.sample_rate_hz},
                    {"center_freq_hz", r.center_freq_hz},
                    {"sample_count", r.sample_count},
                    {"description", r.description}};
  j["psd"] = {{"fft_size", r.fft_size},
              {"window", r.window},
              {"overlap", r.overlap},
              {"averaging_count", r.averaging_count}};
  j["noise_floor"] = {{"level_count", r.noise_floor.level_count},
                      {"level_width_db", r.noise_floor.level_width_db},
                      {"change_level", r.noise_floor.change_level},
                      {"threshold_db", r.noise_floor.threshold_db},
                      {"low_confidence", r.noise_floor.low_confidence}};
  json comps = json::array();
  for (const auto& c : r.components) comps.push_back(component_json(c));
  j["components"] = comps;
  if (!r.timing_s.empty()) j["timing_s"] = timing_json(r.timing_s);
  return j.dump(2) + "\n";
}

pipeline::IdentificationReport parse(const std::string& text) {
  try {
    const json j = json::parse(text);
    pipeline::IdentificationReport r;
    const auto& rec = j.at("recording");
    r.sample_rate_hz = rec.at("sample_rate_hz").get<double>();
    r.center_freq_hz = rec.at("center_freq_hz").get<double>();
    r.sample_count = rec.at("sample_count").get<std::size_t>();
    r.description = rec.at("description").get<std::string>();
    const auto& psd = j.at("psd");
    r.fft_size = psd.at("fft_size").get<std::size_t>();
    r.window = psd.at("window").get<std::string>();
    r.overlap = psd.at("overlap").get<double>();
    r.averaging_count = psd.at("averaging_count").get<std::size_t>();
    const auto& nf = j.at("noise_floor");
    r.noise_floor = {nf.at("level_count").get<std::size_t>(), nf.at("level_width_db").get<double>(),
                     nf.at("change_level").get<std::size_t>(), nf.at("threshold_db").get<double>(),
                     nf.at("low_confidence").get<bool>()};
    for (const auto& c : j.at("components")) r.components.push_back(component_from(c));
    r.timing_s = timing_from(j);
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  } catch (const ParameterError& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  }
}

}  // namespace sigid::report
