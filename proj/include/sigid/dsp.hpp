#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sigid/nfspem.hpp"
#include "sigid/types.hpp"

namespace sigid::dsp {

enum class Window { Hann, Hamming, Rect };

std::string to_string(Window w);
Window window_from_string(const std::string& name);

/// Periodic window of length n.
std::vector<double> make_window(Window w, std::size_t n);

struct PowerSpectrum {
  std::vector<double> values_db;  // bins ordered -fs/2 .. +fs/2
  Axis freq_axis;                 // Hz, start = -fs/2, step = fs/N
  std::size_t fft_size = 0;
  std::size_t averaging_count = 0;
};

/// Averaged periodogram normalized so that white noise of variance s reads s
/// in every bin, for any window.
PowerSpectrum welch_psd(const IqRecording& iq, std::size_t fft_size = 1024,
                        Window window = Window::Hann, double overlap_fraction = 0.5);

struct FirFilter {
  std::vector<double> taps;
  double fc_hz = 0.0;
  double bw_hz = 0.0;
  double fs_hz = 0.0;
  double transition_hz = 0.0;
  double stop_atten_db = 0.0;

  bool is_identity() const { return taps.size() == 1; }
};

/// Kaiser-window linear-phase FIR passing [fc - bw/2, fc + bw/2]. A nonzero fc
/// gives real cosine-modulated taps, which also pass the mirror band at -fc.
/// bw >= fs returns the single-tap identity filter.
FirFilter design_bandpass(double fc_hz, double bw_hz, double fs_hz, double transition_hz,
                          double stop_atten_db);

/// Same-length, delay-compensated filtering (FFT fast convolution).
Samples apply_fir(std::span<const Complex> x, const FirFilter& filter);

/// x[t] *= exp(j(2 pi f t / fs + phase0)).
void frequency_shift(Samples& x, double freq_hz, double fs_hz, double phase0 = 0.0);

struct ChannelizeOptions {
  double guard_factor = 1.2;
  double transition_fraction = 0.25;  // transition width relative to the passband
  double stop_atten_db = 60.0;
  bool decimate = true;
};

/// Mixes the component to 0 Hz, lowpass-filters it to width x guard and
/// decimates by the largest power of two keeping the rate >= 2.5 x passband.
IqRecording channelize(const IqRecording& iq, const nfspem::DetectedComponent& component,
                       const ChannelizeOptions& options = {});

struct Envelope {
  std::vector<double> values_db;
  Axis time_axis;  // seconds
};

/// Centered moving average of |x|^2 over smooth_len samples (shorter windows at
/// the edges), in dB.
Envelope power_envelope(const IqRecording& iq, std::size_t smooth_len);

}  // namespace sigid::dsp
