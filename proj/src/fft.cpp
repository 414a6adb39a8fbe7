#include "sedetect/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <stdexcept>

#include "sedetect/errors.hpp"
#include <utility>

namespace sedetect {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

FftPlan::FftPlan(std::size_t n, FftDirection dir) : n_(n) {
  if (n == 0) throw InvalidInput("FftPlan: size must be positive");
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto* raw = fftw_alloc_complex(n);
  if (raw == nullptr) throw std::bad_alloc();
  buf_ = reinterpret_cast<std::complex<double>*>(raw);
  const int sign = dir == FftDirection::forward ? FFTW_FORWARD : FFTW_BACKWARD;
  // FFTW_ESTIMATE does not touch the buffer and picks the same plan every run.
  plan_ = fftw_plan_dft_1d(static_cast<int>(n), raw, raw, sign, FFTW_ESTIMATE);
  if (plan_ == nullptr) {
    fftw_free(raw);
    buf_ = nullptr;
    throw std::runtime_error("FftPlan: fftw planner failed");
  }
}

FftPlan::~FftPlan() { release(); }

FftPlan::FftPlan(FftPlan&& other) noexcept
    : n_(std::exchange(other.n_, 0)),
      plan_(std::exchange(other.plan_, nullptr)),
      buf_(std::exchange(other.buf_, nullptr)) {}

FftPlan& FftPlan::operator=(FftPlan&& other) noexcept {
  if (this != &other) {
    release();
    n_ = std::exchange(other.n_, 0);
    plan_ = std::exchange(other.plan_, nullptr);
    buf_ = std::exchange(other.buf_, nullptr);
  }
  return *this;
}

void FftPlan::release() noexcept {
  if (plan_ == nullptr && buf_ == nullptr) return;
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plan_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  if (buf_ != nullptr) fftw_free(reinterpret_cast<fftw_complex*>(buf_));
  plan_ = nullptr;
  buf_ = nullptr;
}

std::span<std::complex<double>> FftPlan::buffer() noexcept { return {buf_, n_}; }

void FftPlan::execute_inplace() { fftw_execute(static_cast<fftw_plan>(plan_)); }

void FftPlan::execute(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
  if (in.size() != n_ || out.size() != n_) throw ContractError("FftPlan::execute: size mismatch");
  std::copy(in.begin(), in.end(), buf_);
  execute_inplace();
  std::copy(buf_, buf_ + n_, out.begin());
}

}  // namespace sedetect
