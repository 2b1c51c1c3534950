#include "sigid/iqfile.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sigid/error.hpp"

namespace sigid::iqfile {
namespace {

using json = nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little, "cf32le I/O assumes a little-endian host");

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spill(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot write '" + path + "'");
  out << text;
  if (!out) throw FileError("write failed for '" + path + "'");
}

}  // namespace

std::string meta_path(const std::string& data_path) { return data_path + ".meta.json"; }
std::string truth_path(const std::string& data_path) { return data_path + ".truth.json"; }

void write_recording(const std::string& data_path, const IqRecording& rec) {
  std::string bytes(rec.size() * 2 * sizeof(float), '\0');
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const float iq[2] = {static_cast<float>(rec.samples[i].real()), static_cast<float>(rec.samples[i].imag())};
    std::memcpy(bytes.data() + i * sizeof(iq), iq, sizeof(iq));
  }
  spill(data_path, bytes);

  json meta;
  meta["sample_rate_hz"] = rec.sample_rate_hz;
  meta["center_freq_hz"] = rec.center_freq_hz;
  meta["sample_format"] = kSampleFormat;
  meta["sample_count"] = rec.size();
  meta["description"] = rec.description;
  spill(meta_path(data_path), meta.dump(2) + "\n");
}

IqRecording read_recording(const std::string& data_path) {
  if (!std::filesystem::exists(data_path)) throw FileError("no such file '" + data_path + "'");
  const std::string mpath = meta_path(data_path);
  if (!std::filesystem::exists(mpath)) throw FileError("missing sidecar '" + mpath + "'");

  IqRecording rec;
  std::size_t count = 0;
  try {
    const json meta = json::parse(slurp(mpath));
    rec.sample_rate_hz = meta.at("sample_rate_hz").get<double>();
    rec.center_freq_hz = meta.at("center_freq_hz").get<double>();
    if (meta.at("sample_format").get<std::string>() != kSampleFormat)
      throw FormatError(mpath + ": sample_format must be \"" + kSampleFormat + "\"");
    count = meta.at("sample_count").get<std::size_t>();
    if (meta.contains("description")) rec.description = meta.at("description").get<std::string>();
  } catch (const json::exception& e) {
    throw FormatError(mpath + ": " + e.what());
  }
  if (!(rec.sample_rate_hz > 0.0)) throw FormatError(mpath + ": sample_rate_hz must be > 0");

  const std::string bytes = slurp(data_path);
  const std::size_t frame = 2 * sizeof(float);
  if (bytes.size() != count * frame)
    throw LengthMismatchError(data_path + ": sidecar declares " + std::to_string(count) + " samples (" +
                              std::to_string(count * frame) + " bytes) but the file has " +
                              std::to_string(bytes.size()) + " bytes");
  rec.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    float iq[2];
    std::memcpy(iq, bytes.data() + i * frame, frame);
    rec.samples[i] = {iq[0], iq[1]};
  }
  return rec;
}

void write_truth(const std::string& path, const wavegen::GroundTruth& truth) {
  json j;
  j["fft_size"] = truth.fft_size;
  j["occupancy_fraction"] = truth.occupancy_fraction();
  std::string mask;
  for (bool b : truth.occupancy_mask) mask.push_back(b ? '1' : '0');
  j["occupancy_mask"] = mask;
  json channels = json::array();
  for (std::size_t i = 0; i < truth.occupied_bands.size(); ++i) {
    json c;
    json bands = json::array();
    for (const auto& b : truth.occupied_bands[i]) bands.push_back({b.low_hz, b.high_hz});
    c["occupied_bands_hz"] = bands;
    json bursts = json::array();
    for (const auto& b : truth.burst_intervals[i]) bursts.push_back({b.start_sample, b.length});
    c["burst_intervals"] = bursts;
    c["features_hz"] = truth.feature_table[i];
    channels.push_back(c);
  }
  j["channels"] = channels;
  spill(path, j.dump(2) + "\n");
}

wavegen::GroundTruth read_truth(const std::string& path) {
  wavegen::GroundTruth t;
  try {
    const json j = json::parse(slurp(path));
    t.fft_size = j.at("fft_size").get<std::size_t>();
    for (char c : j.at("occupancy_mask").get<std::string>()) t.occupancy_mask.push_back(c == '1');
    for (const auto& c : j.at("channels")) {
      std::vector<wavegen::Band> bands;
      for (const auto& b : c.at("occupied_bands_hz")) bands.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
      t.occupied_bands.push_back(bands);
      std::vector<wavegen::BurstInterval> bursts;
      for (const auto& b : c.at("burst_intervals"))
        bursts.push_back({b.at(0).get<std::size_t>(), b.at(1).get<std::size_t>()});
      t.burst_intervals.push_back(bursts);
      t.feature_table.push_back(c.at("features_hz").get<std::vector<double>>());
    }
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  return t;
}

}  // namespace sigid::iqfile
