#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sedetect {

// Real-valued samples at a fixed rate.
struct TimeSeries {
  std::vector<double> samples;
  double sample_rate_hz{0.0};

  std::size_t size() const noexcept { return samples.size(); }
  double duration_s() const noexcept {
    return sample_rate_hz > 0.0 ? static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
  }

  // Throws InvalidInput on a nonpositive rate or a non-finite sample.
  void validate() const;
};

// Dense row-major matrix. Spectrogram convention: rows are frequency
// bins (or filters), columns are time indices.
template <class T>
struct Matrix {
  std::size_t rows{0};
  std::size_t cols{0};
  std::vector<T> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

  T& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<T> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const T> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

}  // namespace sedetect
