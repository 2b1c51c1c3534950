#include "sigid/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <utility>

#include "sigid/error.hpp"

namespace sigid {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

FftPlan::FftPlan(std::size_t n, FftDirection direction) : n_(n) {
  if (n == 0) throw ParameterError("FFT size must be positive");
  std::lock_guard lock(planner_mutex());
  auto* in = fftw_alloc_complex(n);
  auto* out = fftw_alloc_complex(n);
  const int sign = direction == FftDirection::Forward ? FFTW_FORWARD : FFTW_BACKWARD;
  plan_ = fftw_plan_dft_1d(static_cast<int>(n), in, out, sign,
                           FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(in);
  fftw_free(out);
  if (plan_ == nullptr) throw Error("FFTW planning failed");
}

FftPlan::~FftPlan() {
  if (plan_ != nullptr) {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  }
}

FftPlan::FftPlan(FftPlan&& other) noexcept
    : n_(other.n_), plan_(std::exchange(other.plan_, nullptr)) {}

FftPlan& FftPlan::operator=(FftPlan&& other) noexcept {
  if (this != &other) {
    if (plan_ != nullptr) {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(static_cast<fftw_plan>(plan_));
    }
    n_ = other.n_;
    plan_ = std::exchange(other.plan_, nullptr);
  }
  return *this;
}

void FftPlan::execute(std::span<const Complex> in, std::span<Complex> out) const {
  if (in.size() != n_ || out.size() != n_)
    throw ParameterError("FFT buffer size mismatch");
  // FFTW does not modify the input of an out-of-place complex transform.
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in.data()));
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(static_cast<fftw_plan>(plan_), src, dst);
}

Samples fft(std::span<const Complex> in) {
  FftPlan plan(in.size(), FftDirection::Forward);
  Samples out(in.size());
  plan.execute(in, out);
  return out;
}

Samples ifft(std::span<const Complex> in) {
  FftPlan plan(in.size(), FftDirection::Inverse);
  Samples out(in.size());
  plan.execute(in, out);
  const double scale = 1.0 / static_cast<double>(in.size());
  for (auto& v : out) v *= scale;
  return out;
}

std::size_t next_pow2(std::size_t n) noexcept {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

bool is_pow2(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace sigid
