#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sedetect/entropy.hpp"
#include "sedetect/evaluation.hpp"
#include "sedetect/series.hpp"
#include "sedetect/tf_decomposition.hpp"

namespace sedetect {

struct SweepSpec {
  double f_start_hz{150.0};
  double f_end_hz{800.0};
  double duration_s{25.0};
  double duty_fraction{0.1};
  int pulse_count{1};
  double sample_rate_hz{2000.0};

  void validate() const;
};

struct SweepSignal {
  TimeSeries signal;
  PresenceMask mask;
};

// Pulses of equal length sit centred in equal slots across the duration.
// Each pulse is a continuous-phase linear chirp from f_start (first sample)
// to f_end (last sample), cosine phase so the first sample is nonzero.
SweepSignal gen_pulsed_fm_sweep(const SweepSpec& spec);

// Zeroes every FFT bin outside [band.low_hz, band.high_hz].
std::vector<double> fft_bandpass(std::span<const double> x, double sample_rate_hz, FrequencyBand band);

// 10 log10 of in-band mean-square power of x over that of w, both measured
// only on mask samples.
double band_limited_snr(const TimeSeries& x, const TimeSeries& w, FrequencyBand band, const PresenceMask& mask);

struct SnrSpec {
  double target_db{0.0};  // -infinity yields pure noise
  FrequencyBand band;
};

struct MixResult {
  TimeSeries mixture;
  double signal_gain{0.0};
};

// w + a x with a chosen in closed form so the band-limited SNR hits the target.
MixResult mix_at_snr(const TimeSeries& x, const TimeSeries& w, const SnrSpec& snr, const PresenceMask& mask);

// White Gaussian noise, high-passed by the preprocessing filter
// (zero-phase Butterworth), unit mean square. Deterministic in seed.
TimeSeries surrogate_noise(std::size_t n, double sample_rate_hz, std::uint64_t seed, double highpass_hz = 100.0);

struct GridConfig {
  std::vector<double> snrs_db{-10.0, -5.0, 0.0, 5.0, 10.0};
  std::vector<std::size_t> window_lengths{1, 301, 501};
  std::vector<SpectrogramKind> methods{SpectrogramKind::stft, SpectrogramKind::cwt_l1};
  EntropyConfig entropy;       // method field is overridden per cell
  FrequencyBand snr_band{150.0, 1000.0};
  double p{0.99};
};

struct GridRow {
  SpectrogramKind method{SpectrogramKind::stft};
  double snr_db{0.0};
  std::size_t window_length{1};
  double stpr{0.0};
  double stnr{0.0};
  double separation{0.0};
  bool converged{false};
  bool degenerate{false};
};

struct GridResult {
  std::vector<GridRow> rows;  // method-major, then window length, then SNR
};

// Entropy is computed once per (method, SNR); each window length reuses it.
GridResult run_grid(const TimeSeries& noise, const SweepSpec& sweep, const GridConfig& cfg);

// Pipeline for a single cell: median filter, k-means, soft scores and rates.
struct CellOutcome {
  std::vector<double> filtered_entropy;
  std::vector<double> scores;
  double separation{0.0};
  bool converged{false};
  bool degenerate{false};
  SoftRates rates;
};
CellOutcome evaluate_cell(std::span<const double> entropy, std::size_t window_length, double p,
                          const PresenceMask& mask);

// Header: method,snr_db,M,stpr,stnr,separation
void write_grid_csv(std::ostream& os, const GridResult& result);

}  // namespace sedetect
