#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sedetect/series.hpp"
#include "sedetect/tf_decomposition.hpp"

namespace sedetect {

struct FrequencyBand {
  double low_hz{150.0};
  double high_hz{1000.0};
};

// Resolved half-open row range [k1, k2) of a spectrogram.
struct BandSelection {
  FrequencyBand band;
  std::size_t k1{0};
  std::size_t k2{0};

  std::size_t bin_count() const noexcept { return k2 - k1; }
};

// STFT rule: k1 = floor(N f1 / fs), k2 = floor(N f2 / fs), upper index
// exclusive, N = fft size.
BandSelection band_indices_stft(FrequencyBand band, std::size_t fft_size, double sample_rate_hz);

// CWT rule: every filter whose centre frequency lies in [f_low, f_high].
BandSelection band_indices_cwt(FrequencyBand band, std::span<const double> center_freqs_hz);

// Dispatches on the spectrogram's power convention.
BandSelection band_indices(FrequencyBand band, const PowerSpectrogram& S);

struct SpectralDistribution {
  Matrix<double> p;                       // [band bin x time]
  std::vector<std::uint8_t> uniform_fallback;  // 1 where the slice was all zero
};

// P[k,m] = S[k,m] / sum_j S[j,m] over the band. All-zero slices become uniform.
SpectralDistribution spectral_distribution(const PowerSpectrogram& S, const BandSelection& band);

struct EntropySeries {
  std::vector<double> values;
  std::size_t bin_count{0};
  std::size_t time_offset_samples{0};

  std::size_t size() const noexcept { return values.size(); }
};

// H[m] = -sum_k P ln P, 0 ln 0 = 0. Throws ContractError if a slice does not
// sum to 1 within 1e-9.
EntropySeries spectral_entropy(const SpectralDistribution& P);

// Entropy of one nonnegative power slice after normalization; ln(K) for an
// all-zero slice.
double slice_entropy(std::span<const double> power);

struct MedianFilterSpec {
  std::size_t window_length{1};  // odd

  void validate() const;
};

// Sliding median over [n-R, n+R], R = (M-1)/2, edges replicated.
std::vector<double> median_filter(std::span<const double> x, const MedianFilterSpec& mf);
EntropySeries median_filter(const EntropySeries& H, const MedianFilterSpec& mf);

// Maps per-column values to one value per input sample. Sample n takes the
// column whose anchor (time_offset + m*hop) is nearest; samples before the
// first or after the last anchor replicate the edge column.
std::vector<double> expand_to_samples(std::span<const double> per_column, std::size_t time_offset_samples,
                                      std::size_t hop, std::size_t n_samples);

struct EntropyConfig {
  SpectrogramKind method{SpectrogramKind::stft};
  WindowSpec window;              // STFT
  double gamma{50.0};             // CWT
  double beta{40.0};              // CWT
  int voices_per_octave{40};      // CWT
  FrequencyBand band;
};

// Full composition: decomposition, power, band-limited entropy, then
// expansion to one value per input sample. For the CWT the filterbank spans
// exactly the band. Streams over frames/rows, so memory stays O(len(x)).
EntropySeries entropy_from_audio(const TimeSeries& x, const EntropyConfig& cfg);

}  // namespace sedetect
