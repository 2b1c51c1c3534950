#include "sigid/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "sigid/error.hpp"
#include "sigid/fft.hpp"

namespace sigid::sensing {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

TauRange clip_range(TauRange r, std::size_t n, bool& truncated) {
  if (r.first > r.last) throw ParameterError("lag range is empty");
  truncated = false;
  if (n == 0 || r.first >= n) throw InsufficientDataError("lag range starts beyond the recording");
  if (r.last >= n) {
    r.last = n - 1;
    truncated = true;
  }
  return r;
}

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<long>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

// Greedy non-maximum suppression: keeps the strongest index, drops everything
// within `radius` of it, repeats. Returns kept indices in ascending order.
std::vector<std::size_t> suppress(const std::vector<std::size_t>& candidates,
                                  const std::vector<double>& score, std::size_t radius) {
  std::vector<std::size_t> order = candidates;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  std::vector<std::size_t> kept;
  for (std::size_t c : order) {
    const bool clash = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return (c > k ? c - k : k - c) <= radius;
    });
    if (!clash) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::Energy: return "energy_detection";
    case Method::Cyclo: return "cyclostationary";
    case Method::Autocorr: return "autocorrelation";
    case Method::MatchedFilter: return "matched_filter";
    case Method::TemplateMatch: return "template_matching";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  for (auto m : {Method::Energy, Method::Cyclo, Method::Autocorr, Method::MatchedFilter,
                 Method::TemplateMatch})
    if (to_string(m) == name) return m;
  throw ParameterError("unknown sensing method '" + name + "'");
}

Evidence energy_detect(const IqRecording& iq, double noise_var, double pfa) {
  if (!(noise_var > 0.0)) throw ParameterError("energy_detect: noise variance must be > 0");
  if (!(pfa > 0.0 && pfa < 0.5)) throw ParameterError("energy_detect: pfa must be in (0, 0.5)");
  const std::size_t m = iq.size();
  if (m < 100) throw InsufficientDataError("energy_detect: needs at least 100 samples");

  Evidence e;
  e.method = Method::Energy;
  for (const auto& v : iq.samples) e.statistic += std::norm(v);
  const double md = static_cast<double>(m);
  const boost::math::normal standard;
  const double q = boost::math::quantile(boost::math::complement(standard, pfa));
  e.threshold = noise_var * (md + std::sqrt(md) * q);
  e.detected = e.statistic > e.threshold;
  return e;
}

TauRange default_tau_range(std::size_t n) {
  return {0, std::min<std::size_t>(256, n / 4)};
}

LagValues sample_autocorrelation(const IqRecording& iq, TauRange range) {
  LagValues out;
  const std::size_t n = iq.size();
  out.range = clip_range(range, n, out.truncated);
  const double inv = 1.0 / static_cast<double>(n);
  const auto& x = iq.samples;
  for (std::size_t tau = out.range.first; tau <= out.range.last; ++tau) {
    Complex acc{};
    for (std::size_t t = 0; t + tau < n; ++t) acc += x[t] * std::conj(x[t + tau]);
    out.values.push_back(acc * inv);
  }
  return out;
}

LagValues cyclic_autocorrelation(const IqRecording& iq, double alpha_hz, TauRange range) {
  const double fs = iq.sample_rate_hz;
  if (!(std::abs(alpha_hz) < fs / 2.0))
    throw ParameterError("cyclic_autocorrelation: |alpha| must be below fs/2");
  if (alpha_hz == 0.0) return sample_autocorrelation(iq, range);

  LagValues out;
  const std::size_t n = iq.size();
  out.range = clip_range(range, n, out.truncated);
  const double inv = 1.0 / static_cast<double>(n);
  const auto& x = iq.samples;
  std::vector<Complex> rot(n);
  for (std::size_t t = 0; t < n; ++t)
    rot[t] = std::polar(1.0, -std::fmod(kTwoPi * alpha_hz / fs * static_cast<double>(t), kTwoPi));
  for (std::size_t tau = out.range.first; tau <= out.range.last; ++tau) {
    Complex acc{};
    for (std::size_t t = 0; t + tau < n; ++t) acc += x[t] * std::conj(x[t + tau]) * rot[t];
    out.values.push_back(acc * inv);
  }
  return out;
}

Axis CyclicProfile::axis() const {
  if (alpha_grid.empty()) return {};
  const double step = alpha_grid.size() > 1 ? alpha_grid[1] - alpha_grid[0] : 1.0;
  return {alpha_grid.front(), step};
}

std::vector<double> make_alpha_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw ParameterError("alpha grid needs step > 0 and hi >= lo");
  std::vector<double> grid;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) grid.push_back(lo + static_cast<double>(i) * step);
  return grid;
}

CyclicProfile scan_cyclic(const IqRecording& iq, const std::vector<double>& grid, TauRange taus) {
  if (grid.empty()) throw ParameterError("scan_cyclic: empty alpha grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ParameterError("scan_cyclic: grid must be increasing");
  const std::size_t n = iq.size();
  bool truncated = false;
  CyclicProfile prof;
  prof.alpha_grid = grid;
  prof.tau_range = clip_range(taus, n, truncated);

  const double fs = iq.sample_rate_hz;
  const std::size_t p = next_pow2(n);
  const double res = fs / static_cast<double>(p);
  const double step = grid.size() > 1 ? grid[1] - grid[0] : fs / static_cast<double>(n);

  // Fine FFT bins pooled into each grid cell.
  struct Cell {
    long lo;
    long hi;
  };
  std::vector<Cell> cells;
  for (double g : grid) {
    long lo = static_cast<long>(std::ceil((g - step / 2.0) / res));
    long hi = static_cast<long>(std::floor((g + step / 2.0) / res));
    if (lo > hi) lo = hi = std::lround(g / res);
    cells.push_back({lo, hi});
  }

  std::vector<double> best(grid.size(), 0.0);
  FftPlan plan(p, FftDirection::Forward);
  Samples prod(p);
  Samples spec(p);
  const auto& x = iq.samples;
  const auto wrap = [p](long m) {
    const long pl = static_cast<long>(p);
    return static_cast<std::size_t>(((m % pl) + pl) % pl);
  };
  for (std::size_t tau = prof.tau_range.first; tau <= prof.tau_range.last; ++tau) {
    std::fill(prod.begin(), prod.end(), Complex{});
    for (std::size_t t = 0; t + tau < n; ++t) prod[t] = x[t] * std::conj(x[t + tau]);
    plan.execute(prod, spec);
    for (std::size_t g = 0; g < cells.size(); ++g)
      for (long m = cells[g].lo; m <= cells[g].hi; ++m)
        best[g] = std::max(best[g], std::abs(spec[wrap(m)]));
  }
  prof.magnitude_db.resize(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g)
    prof.magnitude_db[g] = to_db(best[g] / static_cast<double>(n));
  return prof;
}

Evidence cyclic_evidence(const CyclicProfile& profile, const nfspem::Params& params) {
  Evidence e;
  e.method = Method::Cyclo;
  e.axis = profile.axis();
  e.statistic = profile.magnitude_db.empty()
                    ? 0.0
                    : *std::max_element(profile.magnitude_db.begin(), profile.magnitude_db.end());
  try {
    const auto d = nfspem::nfspem_detect(profile.magnitude_db, e.axis, params);
    e.peaks = d.components;
    e.threshold = d.estimate.threshold_db;
    e.low_confidence = d.estimate.low_confidence;
  } catch (const DegenerateSpectrumError&) {
    e.threshold = e.statistic;
  } catch (const InsufficientDataError&) {
    e.threshold = e.statistic;
  }
  e.detected = !e.peaks.empty();
  return e;
}

Evidence cp_autocorr_detect(const IqRecording& iq, const CpParams& params) {
  Evidence e;
  e.method = Method::Autocorr;
  const std::size_t n = iq.size();
  if (n < 4) throw InsufficientDataError("cp_autocorr_detect: recording too short");
  bool truncated = false;
  const TauRange lags = clip_range({params.lag_first, params.lag_last}, n, truncated);
  e.truncated = truncated;
  e.axis = {static_cast<double>(lags.first), 1.0};

  const auto r = sample_autocorrelation(iq, lags);
  double r0 = 0.0;
  for (const auto& v : iq.samples) r0 += std::norm(v);
  r0 /= static_cast<double>(n);
  if (!(r0 > 0.0)) return e;

  std::vector<double> mags(r.values.size());
  for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = to_db(std::abs(r.values[i]));

  // Under white noise |R(u)| T / (R(0) sqrt(T - u)) is Rayleigh with unit
  // mean square; the threshold covers every lag in the range.
  e.threshold = std::sqrt(std::log(static_cast<double>(mags.size()) / params.pfa));

  // Drop the decaying flank of the zero-lag peak, up to its first local
  // minimum; band-limited signals would otherwise merge it with the CP lag.
  std::size_t skip = 0;
  while (skip + 1 < mags.size() && mags[skip + 1] < mags[skip]) ++skip;
  const std::span<const double> tail(mags.data() + skip, mags.size() - skip);

  nfspem::Detection det;
  try {
    det = nfspem::nfspem_detect(tail, {e.axis.at(static_cast<double>(skip)), 1.0}, {params.k, 1, 1});
  } catch (const DegenerateSpectrumError&) {
    return e;
  } catch (const InsufficientDataError&) {
    return e;
  }
  e.low_confidence = det.estimate.low_confidence;
  // Rank local maxima inside components by prominence over the median of
  // lags [u/2, 3u/2]: sidelobes of a band-limited zero-lag kernel sit among
  // comparable neighbours and may share a component with the CP peak.
  const auto prominence = [&](std::size_t i) {
    const std::size_t lag = lags.first + i;
    const std::size_t lo = std::max(skip, lag / 2 > lags.first ? lag / 2 - lags.first : 0);
    const std::size_t hi = std::min(mags.size() - 1, (3 * lag + 1) / 2 - lags.first);
    return mags[i] - median(std::vector<double>(mags.begin() + static_cast<long>(lo),
                                                mags.begin() + static_cast<long>(hi) + 1));
  };
  const nfspem::DetectedComponent* dominant = nullptr;
  std::size_t best = 0;
  double best_prominence = 0.0;
  for (const auto& c : det.components) {
    for (std::size_t i = skip + c.start_index; i <= skip + c.end_index; ++i) {
      const bool local_max = (i == 0 || mags[i] >= mags[i - 1]) && (i + 1 == mags.size() || mags[i] >= mags[i + 1]);
      if (!local_max) continue;
      const double p = prominence(i);
      if (!dominant || p > best_prominence) {
        dominant = &c;
        best = i;
        best_prominence = p;
      }
    }
  }
  if (!dominant) return e;
  const std::size_t u = lags.first + best;
  const double nd = static_cast<double>(n);
  e.statistic = std::abs(r.values[best]) * nd / (r0 * std::sqrt(nd - static_cast<double>(u)));
  e.peaks = {*dominant};
  e.peaks[0].start_index += skip;
  e.peaks[0].end_index += skip;
  if (!(e.statistic > e.threshold) || u < 2 || 2 * u >= n) return e;
  e.detected = true;
  e.useful_length = static_cast<int>(u);

  // Lag-u product is periodic in the symbol period N, u < N <= 2u.
  const std::size_t len = n - u;
  Samples q(len);
  for (std::size_t t = 0; t < len; ++t) q[t] = iq.samples[t] * std::conj(iq.samples[t + u]);
  const std::size_t p = next_pow2(len);
  Samples padded(p);
  std::copy(q.begin(), q.end(), padded.begin());
  const Samples spec = fft(padded);
  const double pd = static_cast<double>(p);
  const auto m_lo = static_cast<std::size_t>(std::ceil(pd / (2.0 * static_cast<double>(u))));
  const auto m_hi = static_cast<std::size_t>(std::floor(pd / static_cast<double>(u + 1)));
  if (m_lo == 0 || m_lo > m_hi) return e;
  std::size_t m_best = m_lo;
  for (std::size_t m = m_lo; m <= m_hi; ++m)
    if (std::abs(spec[m]) > std::abs(spec[m_best])) m_best = m;

  const long rough = std::lround(pd / static_cast<double>(m_best));
  std::size_t period = 0;
  double period_mag = -1.0;
  for (long cand = rough - 2; cand <= rough + 2; ++cand) {
    if (cand <= static_cast<long>(u) || cand > static_cast<long>(2 * u)) continue;
    Complex acc{};
    for (std::size_t t = 0; t < len; ++t)
      acc += q[t] * std::polar(1.0, -kTwoPi * static_cast<double>(t % static_cast<std::size_t>(cand)) /
                                        static_cast<double>(cand));
    if (std::abs(acc) > period_mag) {
      period_mag = std::abs(acc);
      period = static_cast<std::size_t>(cand);
    }
  }
  if (period == 0) return e;

  std::vector<Complex> fold(period);
  for (std::size_t t = 0; t < len; ++t) fold[t % period] += q[t];
  std::vector<double> mag(period);
  for (std::size_t i = 0; i < period; ++i) mag[i] = std::abs(fold[i]);
  const double level = 0.5 * (*std::max_element(mag.begin(), mag.end()) + median(mag));
  e.cp_length = static_cast<int>(std::count_if(mag.begin(), mag.end(), [&](double v) { return v > level; }));
  return e;
}

Evidence matched_filter_detect(const IqRecording& iq, std::span<const Complex> templ, double pfa) {
  if (templ.empty()) throw ParameterError("matched_filter_detect: empty template");
  if (!(pfa > 0.0 && pfa < 1.0)) throw ParameterError("matched_filter_detect: pfa must be in (0, 1)");
  const std::size_t n = iq.size();
  const std::size_t len = templ.size();
  if (len > n) throw ParameterError("matched_filter_detect: template longer than recording");
  double energy = 0.0;
  for (const auto& v : templ) energy += std::norm(v);
  if (!(energy > 0.0)) throw ParameterError("matched_filter_detect: all-zero template");

  Evidence e;
  e.method = Method::MatchedFilter;
  e.axis = {0.0, 1.0 / iq.sample_rate_hz};
  const std::size_t positions = n - len + 1;
  e.threshold = std::log(static_cast<double>(positions) / pfa);

  // Noise power from the median of |x|^2 (exponential under complex Gaussian
  // noise), so a strong signal does not inflate the estimate.
  std::vector<double> power(n);
  for (std::size_t t = 0; t < n; ++t) power[t] = std::norm(iq.samples[t]);
  double noise = median(power) / std::numbers::ln2;
  if (!(noise > 0.0)) noise = std::accumulate(power.begin(), power.end(), 0.0) / static_cast<double>(n);
  if (!(noise > 0.0)) return e;

  const std::size_t p = next_pow2(n + len);
  Samples a(p);
  Samples b(p);
  std::copy(iq.samples.begin(), iq.samples.end(), a.begin());
  std::copy(templ.begin(), templ.end(), b.begin());
  FftPlan fwd(p, FftDirection::Forward);
  FftPlan inv(p, FftDirection::Inverse);
  Samples fa(p);
  Samples fb(p);
  fwd.execute(a, fa);
  fwd.execute(b, fb);
  for (std::size_t k = 0; k < p; ++k) fa[k] *= std::conj(fb[k]);
  inv.execute(fa, a);

  const double scale = 1.0 / static_cast<double>(p);
  std::vector<double> z(positions);
  std::vector<std::size_t> above;
  for (std::size_t t = 0; t < positions; ++t) {
    z[t] = std::norm(a[t] * scale) / (energy * noise);
    if (z[t] > e.threshold) above.push_back(t);
  }
  e.statistic = *std::max_element(z.begin(), z.end());
  for (std::size_t t : suppress(above, z, len - 1)) {
    nfspem::DetectedComponent c;
    c.start_index = c.end_index = t;
    c.center = e.axis.at(static_cast<double>(t));
    c.width = static_cast<double>(len) / iq.sample_rate_hz;
    c.peak_value_db = to_db(z[t]);
    c.mean_excess_db = to_db(z[t]) - to_db(e.threshold);
    e.peaks.push_back(c);
  }
  e.detected = !e.peaks.empty();
  return e;
}

Evidence spectral_template_match(const dsp::PowerSpectrum& psd, std::span<const double> templ,
                                 double min_score) {
  const std::size_t n = psd.values_db.size();
  const std::size_t len = templ.size();
  if (len < 2 || len >= n) throw ParameterError("spectral_template_match: template must be shorter than the PSD");

  Evidence e;
  e.method = Method::TemplateMatch;
  e.axis = psd.freq_axis;
  e.threshold = min_score;

  const double lt = static_cast<double>(len);
  const double t_mean = std::accumulate(templ.begin(), templ.end(), 0.0) / lt;
  double t_var = 0.0;
  for (double v : templ) t_var += (v - t_mean) * (v - t_mean);

  const std::size_t offsets = n - len + 1;
  std::vector<double> score(offsets, 0.0);
  std::size_t flat_slices = 0;
  if (t_var > 0.0) {
    for (std::size_t o = 0; o < offsets; ++o) {
      const double* s = psd.values_db.data() + o;
      const double s_mean = std::accumulate(s, s + len, 0.0) / lt;
      double cov = 0.0;
      double s_var = 0.0;
      for (std::size_t i = 0; i < len; ++i) {
        cov += (s[i] - s_mean) * (templ[i] - t_mean);
        s_var += (s[i] - s_mean) * (s[i] - s_mean);
      }
      if (s_var > 0.0)
        score[o] = cov / std::sqrt(s_var * t_var);
      else
        ++flat_slices;
    }
  }
  e.flat_input = !(t_var > 0.0) || flat_slices == offsets;
  e.statistic = *std::max_element(score.begin(), score.end());

  std::vector<std::size_t> maxima;
  for (std::size_t o = 0; o < offsets; ++o) {
    if (score[o] < min_score) continue;
    if (o > 0 && score[o - 1] > score[o]) continue;
    if (o + 1 < offsets && score[o + 1] > score[o]) continue;
    maxima.push_back(o);
  }
  for (std::size_t o : suppress(maxima, score, len / 2)) {
    nfspem::DetectedComponent c;
    c.start_index = o;
    c.end_index = o + len - 1;
    c.center = e.axis.at(static_cast<double>(o) + 0.5 * (lt - 1.0));
    c.width = lt * e.axis.step;
    double peak = psd.values_db[o];
    for (std::size_t i = o; i < o + len; ++i) peak = std::max(peak, psd.values_db[i]);
    c.peak_value_db = peak;
    e.peaks.push_back(c);
    e.scores.push_back(score[o]);
  }
  e.detected = !e.peaks.empty();
  return e;
}

}  // namespace sigid::sensing
