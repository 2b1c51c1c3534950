#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sigid/config.hpp"
#include "sigid/dsp.hpp"
#include "sigid/error.hpp"
#include "sigid/iqfile.hpp"
#include "sigid/nfspem.hpp"
#include "sigid/pipeline.hpp"
#include "sigid/report.hpp"
#include "sigid/sensing.hpp"
#include "sigid/wavegen.hpp"

namespace py = pybind11;
using namespace sigid;

namespace {

using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using ComplexArray = py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>;

IqRecording to_recording(const ComplexArray& samples, double sample_rate_hz, double center_freq_hz) {
  if (samples.ndim() != 1) throw ParameterError("samples must be one-dimensional");
  IqRecording r;
  r.samples.assign(samples.data(), samples.data() + samples.size());
  r.sample_rate_hz = sample_rate_hz;
  r.center_freq_hz = center_freq_hz;
  return r;
}

ComplexArray to_array(const Samples& s) {
  ComplexArray out(static_cast<py::ssize_t>(s.size()));
  std::copy(s.begin(), s.end(), out.mutable_data());
  return out;
}

py::dict component_dict(const nfspem::DetectedComponent& c) {
  py::dict d;
  d["start_index"] = c.start_index;
  d["end_index"] = c.end_index;
  d["center"] = c.center;
  d["width"] = c.width;
  d["peak_value_db"] = c.peak_value_db;
  d["mean_excess_db"] = c.mean_excess_db;
  return d;
}

py::dict evidence_dict(const sensing::Evidence& e) {
  py::dict d;
  d["detected"] = e.detected;
  d["statistic"] = e.statistic;
  d["threshold"] = e.threshold;
  d["low_confidence"] = e.low_confidence;
  py::list peaks;
  for (const auto& p : e.peaks) peaks.append(component_dict(p));
  d["peaks"] = peaks;
  if (e.useful_length) d["useful_length"] = *e.useful_length;
  if (e.cp_length) d["cp_length"] = *e.cp_length;
  return d;
}

py::tuple recording_tuple(const IqRecording& r) {
  return py::make_tuple(to_array(r.samples), r.sample_rate_hz, r.center_freq_hz);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Wideband signal identification core";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  static py::exception<UnsupportedMethodError> unsupported(m, "UnsupportedMethodError", base.ptr());
  static py::exception<FormatError> format(m, "FormatError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const UnsupportedMethodError& e) {
      unsupported(e.what());
    } catch (const FormatError& e) {
      format(e.what());
    } catch (const Error& e) {
      base(e.what());
    }
  });

  m.def(
      "nfspem_detect",
      [](const RealArray& values_db, double axis_start, double axis_step, double k, std::size_t min_width,
         std::size_t merge_gap) {
        const std::span<const double> v(values_db.data(), static_cast<std::size_t>(values_db.size()));
        const auto d = nfspem::nfspem_detect(v, {axis_start, axis_step}, {k, min_width, merge_gap});
        py::dict out;
        out["level_count"] = d.histogram.level_count;
        out["counts"] = d.histogram.counts;
        out["change_level"] = d.estimate.change_level;
        out["threshold_db"] = d.estimate.threshold_db;
        out["low_confidence"] = d.estimate.low_confidence;
        py::list comps;
        for (const auto& c : d.components) comps.append(component_dict(c));
        out["components"] = comps;
        return out;
      },
      py::arg("values_db"), py::arg("axis_start") = 0.0, py::arg("axis_step") = 1.0, py::arg("k") = 1.0,
      py::arg("min_width") = 3, py::arg("merge_gap") = 2);

  m.def(
      "welch_psd",
      [](const ComplexArray& samples, double sample_rate_hz, std::size_t fft_size, const std::string& window,
         double overlap) {
        const auto psd = dsp::welch_psd(to_recording(samples, sample_rate_hz, 0.0), fft_size,
                                        dsp::window_from_string(window), overlap);
        RealArray freqs(static_cast<py::ssize_t>(psd.values_db.size()));
        for (std::size_t i = 0; i < psd.values_db.size(); ++i)
          freqs.mutable_data()[i] = psd.freq_axis.at(static_cast<double>(i));
        return py::make_tuple(freqs, RealArray(static_cast<py::ssize_t>(psd.values_db.size()), psd.values_db.data()));
      },
      py::arg("samples"), py::arg("sample_rate_hz"), py::arg("fft_size") = 1024, py::arg("window") = "hann",
      py::arg("overlap") = 0.5);

  m.def(
      "simulate",
      [](const std::string& scenario_path, std::optional<std::uint64_t> seed) {
        auto spec = config::load_scenario(scenario_path);
        if (seed) spec.seed = *seed;
        return recording_tuple(wavegen::compose_scenario(spec).recording);
      },
      py::arg("scenario_path"), py::arg("seed") = py::none(),
      "Returns (samples, sample_rate_hz, center_freq_hz).");

  m.def(
      "identify",
      [](const ComplexArray& samples, double sample_rate_hz, const std::string& plan_path, double center_freq_hz,
         std::optional<std::string> config_path, bool no_channelize) {
        const auto rec = to_recording(samples, sample_rate_hz, center_freq_hz);
        const auto plan = config::load_plan(plan_path);
        auto cfg = config_path ? config::load_pipeline_config(*config_path) : pipeline::PipelineConfig{};
        cfg.no_channelize = cfg.no_channelize || no_channelize;
        pipeline::IdentificationReport rep;
        {
          py::gil_scoped_release release;
          rep = pipeline::run_identification(rec, plan, cfg);
        }
        return report::serialize(rep);
      },
      py::arg("samples"), py::arg("sample_rate_hz"), py::arg("plan_path"), py::arg("center_freq_hz") = 0.0,
      py::arg("config_path") = py::none(), py::arg("no_channelize") = false,
      "Runs the identification pipeline and returns the JSON report.");

  m.def(
      "energy_detect",
      [](const ComplexArray& samples, double noise_var, double pfa) {
        return evidence_dict(sensing::energy_detect(to_recording(samples, 1.0, 0.0), noise_var, pfa));
      },
      py::arg("samples"), py::arg("noise_var"), py::arg("pfa") = 0.05);

  m.def(
      "cp_detect",
      [](const ComplexArray& samples, std::size_t lag_first, std::size_t lag_last) {
        sensing::CpParams p;
        p.lag_first = lag_first;
        p.lag_last = lag_last;
        return evidence_dict(sensing::cp_autocorr_detect(to_recording(samples, 1.0, 0.0), p));
      },
      py::arg("samples"), py::arg("lag_first") = 1, py::arg("lag_last") = 512);

  m.def(
      "scan_cyclic",
      [](const ComplexArray& samples, double sample_rate_hz, double lo_hz, double hi_hz, double step_hz) {
        const auto rec = to_recording(samples, sample_rate_hz, 0.0);
        const auto prof = sensing::scan_cyclic(rec, sensing::make_alpha_grid(lo_hz, hi_hz, step_hz),
                                               sensing::default_tau_range(rec.size()));
        return py::make_tuple(RealArray(static_cast<py::ssize_t>(prof.alpha_grid.size()), prof.alpha_grid.data()),
                              RealArray(static_cast<py::ssize_t>(prof.magnitude_db.size()), prof.magnitude_db.data()));
      },
      py::arg("samples"), py::arg("sample_rate_hz"), py::arg("lo_hz"), py::arg("hi_hz"), py::arg("step_hz"));

  m.def(
      "read_recording", [](const std::string& path) { return recording_tuple(iqfile::read_recording(path)); },
      py::arg("path"));
  m.def(
      "write_recording",
      [](const std::string& path, const ComplexArray& samples, double sample_rate_hz, double center_freq_hz) {
        iqfile::write_recording(path, to_recording(samples, sample_rate_hz, center_freq_hz));
      },
      py::arg("path"), py::arg("samples"), py::arg("sample_rate_hz"), py::arg("center_freq_hz") = 0.0);
}
