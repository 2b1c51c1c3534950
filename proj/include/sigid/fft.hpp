#pragma once

#include <cstddef>
#include <span>

#include "sigid/types.hpp"

namespace sigid {

enum class FftDirection { Forward, Inverse };

/// Out-of-place complex DFT of fixed size backed by FFTW. The inverse is
/// unnormalized. Planning is serialized internally; one plan may be executed
/// from several threads as long as each call uses its own buffers.
class FftPlan {
 public:
  FftPlan(std::size_t n, FftDirection direction);
  ~FftPlan();

  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  FftPlan(FftPlan&& other) noexcept;
  FftPlan& operator=(FftPlan&& other) noexcept;

  std::size_t size() const noexcept { return n_; }

  /// `in` and `out` must both hold size() elements and must not overlap.
  void execute(std::span<const Complex> in, std::span<Complex> out) const;

 private:
  std::size_t n_ = 0;
  void* plan_ = nullptr;
};

/// Convenience one-shot transforms.
Samples fft(std::span<const Complex> in);
Samples ifft(std::span<const Complex> in);  // normalized by 1/n

std::size_t next_pow2(std::size_t n) noexcept;
bool is_pow2(std::size_t n) noexcept;

}  // namespace sigid
