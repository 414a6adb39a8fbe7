#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace sedetect {

enum class FftDirection { forward, backward };

// Owning wrapper around an FFTW complex-to-complex plan of fixed size.
// The backward transform is unnormalized (FFTW convention); callers
// divide by size() themselves.
//
// Plan creation is serialized internally. A single FftPlan must not be
// executed from two threads at once since it owns its work buffers.
class FftPlan {
 public:
  FftPlan(std::size_t n, FftDirection dir);
  ~FftPlan();

  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  FftPlan(FftPlan&& other) noexcept;
  FftPlan& operator=(FftPlan&& other) noexcept;

  std::size_t size() const noexcept { return n_; }

  // in and out must both have size(); they may alias.
  void execute(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);

  // Direct access to the plan's aligned input buffer, transformed in place
  // by execute_inplace(). Avoids a copy in hot loops.
  std::span<std::complex<double>> buffer() noexcept;
  void execute_inplace();

 private:
  void release() noexcept;

  std::size_t n_{0};
  void* plan_{nullptr};
  std::complex<double>* buf_{nullptr};
};

}  // namespace sedetect
