#include "cli.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sigid/config.hpp"
#include "sigid/error.hpp"
#include "sigid/eval.hpp"
#include "sigid/iqfile.hpp"
#include "sigid/nfspem.hpp"
#include "sigid/pipeline.hpp"
#include "sigid/report.hpp"
#include "sigid/wavegen.hpp"

namespace sigid::cli {
namespace {

struct GlobalFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> fft_size;
  std::optional<double> k;
  std::string config;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FileError("cannot open " + path + " for writing");
  f << text;
  if (!f) throw FileError("write failed: " + path);
}

// One "axis,value" row per point, no header.
void write_series(const std::string& path, const Axis& axis, const std::vector<double>& values) {
  std::string text;
  char line[64];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(line, sizeof line, "%.10g,%.10g\n", axis.at(static_cast<double>(i)), values[i]);
    text += line;
  }
  write_text(path, text);
}

std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

int cmd_simulate(const GlobalFlags& g, const std::string& config_path, const std::string& out_path,
                 std::ostream& out) {
  auto spec = config::load_scenario(config_path);
  if (g.seed) spec.seed = *g.seed;
  if (g.fft_size) spec.mask_fft_size = *g.fft_size;
  const auto scenario = wavegen::compose_scenario(spec);
  iqfile::write_recording(out_path, scenario.recording);
  iqfile::write_truth(iqfile::truth_path(out_path), scenario.truth);
  out << "wrote " << scenario.recording.samples.size() << " samples to " << out_path << "\n";
  return kOk;
}

struct IdentifyFlags {
  std::string iq_path;
  std::string plan;
  std::string out;
  std::string emit_psd;
  std::string emit_cyclic;
  std::string emit_envelope;
  bool no_channelize = false;
  bool timing = false;
  bool parallel = false;
};

int cmd_identify(const GlobalFlags& g, const IdentifyFlags& f, std::ostream& out) {
  pipeline::PipelineConfig cfg;
  if (!g.config.empty()) cfg = config::load_pipeline_config(g.config, cfg);
  if (g.fft_size) cfg.fft_size = *g.fft_size;
  if (g.k) cfg.wideband.k = *g.k;
  if (f.no_channelize) cfg.no_channelize = true;
  if (f.timing) cfg.record_timing = true;
  if (f.parallel) cfg.parallel = true;
  cfg.validate();

  std::string plan_path = f.plan;
  if (plan_path.empty()) {
    if (const char* env = std::getenv("HS_PLAN_PATH"); env && *env) plan_path = env;
  }
  if (plan_path.empty()) plan_path = cfg.plan_path;
  if (plan_path.empty()) throw ParameterError("no channel plan: pass --plan or set HS_PLAN_PATH");
  const auto plan = config::load_plan(plan_path);
  const auto iq = iqfile::read_recording(f.iq_path);

  pipeline::Artifacts artifacts;
  const auto rep = pipeline::run_identification(iq, plan, cfg, &artifacts);
  const std::string text = report::serialize(rep);
  if (f.out.empty() || f.out == "-")
    out << text;
  else
    write_text(f.out, text);

  if (!f.emit_psd.empty())
    write_series(f.emit_psd, artifacts.psd.freq_axis, artifacts.psd.values_db);
  for (std::size_t i = 0; i < artifacts.cyclic.size(); ++i) {
    if (f.emit_cyclic.empty() || !artifacts.cyclic[i]) continue;
    const auto& p = *artifacts.cyclic[i];
    write_series(f.emit_cyclic + "_c" + std::to_string(i) + ".csv", p.axis(), p.magnitude_db);
  }
  for (std::size_t i = 0; i < artifacts.envelopes.size(); ++i) {
    if (f.emit_envelope.empty() || !artifacts.envelopes[i]) continue;
    const auto& e = *artifacts.envelopes[i];
    write_series(f.emit_envelope + "_c" + std::to_string(i) + ".csv", e.time_axis, e.values_db);
  }
  return kOk;
}

struct EvaluateFlags {
  std::vector<double> snr;
  std::vector<double> occupancy;
  std::size_t trials = 300;
  std::size_t resamples = 1000;
  std::size_t workers = 1;
  std::size_t segments = 512;
  std::string out;
};

int cmd_evaluate(const GlobalFlags& g, EvaluateFlags f, std::ostream& out) {
  if (f.snr.empty())
    for (int s = -4; s <= 20; s += 2) f.snr.push_back(s);
  if (f.occupancy.empty()) f.occupancy = {0.0, 0.25, 0.6, 0.75, 0.9};
  eval::GridOptions opt;
  opt.fft_size = g.fft_size.value_or(1024);
  opt.workers = f.workers;
  opt.trial.segments = f.segments;
  if (g.k) opt.trial.nfspem.k = *g.k;
  const auto cells = eval::confidence_grid(f.snr, f.occupancy, f.trials, f.resamples, g.seed.value_or(1), opt);
  std::ostringstream csv;
  eval::write_csv(csv, cells);
  if (f.out.empty() || f.out == "-")
    out << csv.str();
  else
    write_text(f.out, csv.str());
  return kOk;
}

struct NfspemFlags {
  std::string input;
  std::size_t min_width = 1;
  std::size_t merge_gap = 0;
};

// Accepts one value per line or "axis,value" rows; a non-numeric first line
// is taken as a header.
int cmd_nfspem(const GlobalFlags& g, const NfspemFlags& f, std::ostream& out) {
  std::ifstream file;
  std::istream* in = &std::cin;
  if (f.input != "-") {
    file.open(f.input);
    if (!file) throw FileError("cannot open " + f.input);
    in = &file;
  }
  std::vector<double> axis_values;
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(*in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto comma = line.rfind(',');
    const auto v = parse_number(comma == std::string::npos ? line : std::string_view(line).substr(comma + 1));
    std::optional<double> a;
    if (comma != std::string::npos) a = parse_number(std::string_view(line).substr(0, line.find(',')));
    if (!v || (comma != std::string::npos && !a)) {
      if (values.empty() && line_no == 1) continue;
      throw ConfigError(f.input, static_cast<int>(line_no), "not a number: " + line);
    }
    values.push_back(*v);
    if (a) axis_values.push_back(*a);
  }
  Axis axis{0.0, 1.0};
  if (axis_values.size() == values.size() && values.size() >= 2)
    axis = {axis_values[0], axis_values[1] - axis_values[0]};

  const auto det = nfspem::nfspem_detect(values, axis, {g.k.value_or(1.0), f.min_width, f.merge_gap});
  nlohmann::ordered_json j;
  j["sample_count"] = values.size();
  j["level_count"] = det.histogram.level_count;
  j["level_width"] = det.histogram.level_width;
  j["y_min"] = det.histogram.y_min;
  j["y_max"] = det.histogram.y_max;
  j["counts"] = det.histogram.counts;
  j["cusum"] = det.estimate.cusum;
  j["change_level"] = det.estimate.change_level;
  j["threshold"] = det.estimate.threshold_db;
  j["low_confidence"] = det.estimate.low_confidence;
  auto comps = nlohmann::ordered_json::array();
  for (const auto& c : det.components) {
    nlohmann::ordered_json cj;
    cj["start_index"] = c.start_index;
    cj["end_index"] = c.end_index;
    cj["center"] = c.center;
    cj["width"] = c.width;
    cj["peak_value"] = c.peak_value_db;
    cj["mean_excess"] = c.mean_excess_db;
    comps.push_back(cj);
  }
  j["components"] = comps;
  out << j.dump(2) << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wideband spectrum sensing and signal identification"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  std::uint64_t seed = 0;
  std::size_t fft_size = 0;
  double k = 0.0;
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed (simulate, evaluate)");
  auto* fft_opt = app.add_option("--fft-size", fft_size, "FFT size for the wideband PSD");
  auto* k_opt = app.add_option("--k", k, "NFSPEM level-width factor");
  app.add_option("--config", g.config, "Pipeline config file (YAML)");

  auto* sim = app.add_subcommand("simulate", "Generate a recording and its ground truth from a scenario file");
  std::string sim_config;
  std::string sim_out;
  sim->add_option("scenario", sim_config, "Scenario file (YAML)")->required();
  sim->add_option("-o,--out", sim_out, "Output data file (.cf32)")->required();

  auto* ident = app.add_subcommand("identify", "Run the identification pipeline on a recording");
  IdentifyFlags idf;
  ident->add_option("recording", idf.iq_path, "IQ data file with .meta.json sidecar")->required();
  ident->add_option("--plan", idf.plan, "Channel plan (YAML); defaults to $HS_PLAN_PATH");
  ident->add_option("-o,--out", idf.out, "Report path (default stdout)");
  ident->add_option("--emit-psd", idf.emit_psd, "Write the wideband PSD as CSV");
  ident->add_option("--emit-cyclic", idf.emit_cyclic, "Write cyclic profiles to <prefix>_c<i>.csv");
  ident->add_option("--emit-envelope", idf.emit_envelope, "Write burst envelopes to <prefix>_c<i>.csv");
  ident->add_flag("--no-channelize", idf.no_channelize, "Skip mixing and bandpass filtering (debug)");
  ident->add_flag("--timing", idf.timing, "Record stage timings in the report");
  ident->add_flag("--parallel", idf.parallel, "Process components on worker threads");

  auto* ev = app.add_subcommand("evaluate", "Confidence grid over SNR and occupancy, as CSV");
  EvaluateFlags evf;
  ev->add_option("--snr", evf.snr, "SNR values in dB")->delimiter(',');
  ev->add_option("--occupancy", evf.occupancy, "Occupancy fractions")->delimiter(',');
  ev->add_option("--trials", evf.trials, "Trials per cell")->capture_default_str();
  ev->add_option("--resamples", evf.resamples, "Bootstrap resamples")->capture_default_str();
  ev->add_option("--workers", evf.workers, "Worker threads")->capture_default_str();
  ev->add_option("--segments", evf.segments, "PSD segments per trial")->capture_default_str();
  ev->add_option("-o,--out", evf.out, "CSV path (default stdout)");

  auto* nf = app.add_subcommand("nfspem", "Noise floor and components of a CSV series");
  NfspemFlags nff;
  nf->add_option("input", nff.input, "CSV of values or axis,value rows ('-' for stdin)")->required();
  nf->add_option("--min-width", nff.min_width, "Minimum component width in samples")->capture_default_str();
  nf->add_option("--merge-gap", nff.merge_gap, "Merge components separated by at most this many samples")
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
  if (*seed_opt) g.seed = seed;
  if (*fft_opt) g.fft_size = fft_size;
  if (*k_opt) g.k = k;

  try {
    if (*sim) return cmd_simulate(g, sim_config, sim_out, out);
    if (*ident) return cmd_identify(g, idf, out);
    if (*ev) return cmd_evaluate(g, evf, out);
    if (*nf) return cmd_nfspem(g, nff, out);
  } catch (const UnsupportedMethodError& e) {
    err << "error: " << e.what() << "\n";
    return kUnsupportedMethod;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const FileError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace sigid::cli
