#include "sedetect/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sedetect/errors.hpp"

namespace sedetect {

namespace {

void check_band(FrequencyBand band) {
  if (!std::isfinite(band.low_hz) || !std::isfinite(band.high_hz) || band.low_hz < 0.0) {
    throw InvalidBand("band: edges must be finite and nonnegative");
  }
  if (!(band.low_hz < band.high_hz)) {
    throw InvalidBand("band: low edge " + std::to_string(band.low_hz) + " Hz must be below high edge " +
                      std::to_string(band.high_hz) + " Hz");
  }
}

double clamp_entropy(double h, std::size_t bins) {
  return std::clamp(h, 0.0, std::log(static_cast<double>(bins)));
}

}  // namespace

BandSelection band_indices_stft(FrequencyBand band, std::size_t fft_size, double sample_rate_hz) {
  check_band(band);
  if (fft_size == 0 || !(sample_rate_hz > 0.0)) throw InvalidInput("band: bad fft size or sample rate");
  if (band.high_hz > sample_rate_hz / 2.0) throw InvalidBand("band: high edge above Nyquist");
  const double n = static_cast<double>(fft_size);
  BandSelection sel;
  sel.band = band;
  sel.k1 = static_cast<std::size_t>(std::floor(n * band.low_hz / sample_rate_hz));
  sel.k2 = static_cast<std::size_t>(std::floor(n * band.high_hz / sample_rate_hz));
  if (sel.k2 <= sel.k1) throw InvalidBand("band: selects no STFT bins");
  return sel;
}

BandSelection band_indices_cwt(FrequencyBand band, std::span<const double> center_freqs_hz) {
  check_band(band);
  const double lo = band.low_hz * (1.0 - 1e-9);
  const double hi = band.high_hz * (1.0 + 1e-9);
  std::size_t first = center_freqs_hz.size();
  std::size_t last = 0;
  for (std::size_t k = 0; k < center_freqs_hz.size(); ++k) {
    const double f = center_freqs_hz[k];
    if (f >= lo && f <= hi) {
      first = std::min(first, k);
      last = k;
    }
  }
  if (first == center_freqs_hz.size()) throw InvalidBand("band: selects no CWT filters");
  BandSelection sel;
  sel.band = band;
  sel.k1 = first;
  sel.k2 = last + 1;
  return sel;
}

BandSelection band_indices(FrequencyBand band, const PowerSpectrogram& S) {
  if (S.convention == PowerConvention::stft_periodogram) {
    return band_indices_stft(band, S.axes.fft_size, S.axes.sample_rate_hz);
  }
  return band_indices_cwt(band, S.axes.freq_axis_hz);
}

SpectralDistribution spectral_distribution(const PowerSpectrogram& S, const BandSelection& band) {
  if (band.k2 <= band.k1 || band.k2 > S.values.rows) throw InvalidBand("spectral distribution: band outside spectrogram");
  const std::size_t bins = band.bin_count();
  const std::size_t cols = S.values.cols;
  SpectralDistribution out;
  out.p = Matrix<double>(bins, cols);
  out.uniform_fallback.assign(cols, 0);
  for (std::size_t m = 0; m < cols; ++m) {
    double total = 0.0;
    for (std::size_t k = band.k1; k < band.k2; ++k) total += S.values(k, m);
    if (total > 0.0) {
      for (std::size_t k = 0; k < bins; ++k) out.p(k, m) = S.values(band.k1 + k, m) / total;
    } else {
      out.uniform_fallback[m] = 1;
      for (std::size_t k = 0; k < bins; ++k) out.p(k, m) = 1.0 / static_cast<double>(bins);
    }
  }
  return out;
}

EntropySeries spectral_entropy(const SpectralDistribution& P) {
  const std::size_t bins = P.p.rows;
  EntropySeries out;
  out.bin_count = bins;
  out.values.resize(P.p.cols);
  for (std::size_t m = 0; m < P.p.cols; ++m) {
    double total = 0.0;
    double h = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double p = P.p(k, m);
      total += p;
      if (p > 0.0) h -= p * std::log(p);
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw ContractError("spectral entropy: slice " + std::to_string(m) + " sums to " + std::to_string(total));
    }
    out.values[m] = clamp_entropy(h, bins);
  }
  return out;
}

double slice_entropy(std::span<const double> power) {
  const std::size_t bins = power.size();
  if (bins == 0) throw InvalidBand("slice entropy: empty slice");
  double total = 0.0;
  for (double s : power) total += s;
  if (!(total > 0.0)) return std::log(static_cast<double>(bins));
  double h = 0.0;
  for (double s : power) {
    if (s > 0.0) {
      const double p = s / total;
      h -= p * std::log(p);
    }
  }
  return clamp_entropy(h, bins);
}

void MedianFilterSpec::validate() const {
  if (window_length == 0 || window_length % 2 == 0) {
    throw InvalidInput("median filter: window length must be odd and positive, got " + std::to_string(window_length));
  }
}

std::vector<double> median_filter(std::span<const double> x, const MedianFilterSpec& mf) {
  mf.validate();
  const std::size_t n = x.size();
  if (mf.window_length == 1 || n == 0) return {x.begin(), x.end()};

  const auto r = static_cast<std::ptrdiff_t>(mf.window_length / 2);
  const auto last = static_cast<std::ptrdiff_t>(n) - 1;
  auto at = [&](std::ptrdiff_t i) { return x[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, last))]; };

  std::vector<double> window;
  window.reserve(mf.window_length);
  for (std::ptrdiff_t i = -r; i <= r; ++i) window.push_back(at(i));
  std::sort(window.begin(), window.end());

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = window[static_cast<std::size_t>(r)];
    if (i + 1 == n) break;
    const auto c = static_cast<std::ptrdiff_t>(i);
    const double outgoing = at(c - r);
    const double incoming = at(c + r + 1);
    if (outgoing == incoming) continue;
    window.erase(std::lower_bound(window.begin(), window.end(), outgoing));
    window.insert(std::upper_bound(window.begin(), window.end(), incoming), incoming);
  }
  return y;
}

EntropySeries median_filter(const EntropySeries& H, const MedianFilterSpec& mf) {
  EntropySeries out;
  out.values = median_filter(H.values, mf);
  out.bin_count = H.bin_count;
  out.time_offset_samples = H.time_offset_samples;
  return out;
}

std::vector<double> expand_to_samples(std::span<const double> per_column, std::size_t time_offset_samples,
                                      std::size_t hop, std::size_t n_samples) {
  if (per_column.empty()) throw InvalidInput("expand: no columns");
  if (hop == 0) throw InvalidInput("expand: hop must be positive");
  std::vector<double> out(n_samples);
  const std::size_t last = per_column.size() - 1;
  for (std::size_t n = 0; n < n_samples; ++n) {
    std::size_t m = 0;
    if (n > time_offset_samples) m = std::min(last, (n - time_offset_samples + hop / 2) / hop);
    out[n] = per_column[m];
  }
  return out;
}

EntropySeries entropy_from_audio(const TimeSeries& x, const EntropyConfig& cfg) {
  x.validate();
  check_band(cfg.band);
  EntropySeries out;

  if (cfg.method == SpectrogramKind::stft) {
    const WindowSpec& win = cfg.window;
    win.validate();
    const BandSelection band = band_indices_stft(cfg.band, win.fft_size, x.sample_rate_hz);
    const double inv_n = 1.0 / static_cast<double>(win.length_samples);
    std::vector<double> per_column(stft_frame_count(x.size(), win));
    std::vector<double> slice(band.bin_count());
    for_each_stft_frame(x, win, [&](std::size_t m, std::span<const std::complex<double>> col) {
      for (std::size_t k = 0; k < slice.size(); ++k) slice[k] = std::norm(col[band.k1 + k]) * inv_n;
      per_column[m] = slice_entropy(slice);
    });
    out.values = expand_to_samples(per_column, win.length_samples / 2, win.hop(), x.size());
    out.bin_count = band.bin_count();
    out.time_offset_samples = 0;
    return out;
  }

  MorseFilterbankSpec spec;
  spec.gamma = cfg.gamma;
  spec.beta = cfg.beta;
  spec.voices_per_octave = cfg.voices_per_octave;
  spec.f_low_hz = cfg.band.low_hz;
  spec.f_high_hz = cfg.band.high_hz;
  spec.sample_rate_hz = x.sample_rate_hz;
  const MorseFilterbank fb = design_morse_filterbank(spec, x.size());
  const BandSelection band = band_indices_cwt(cfg.band, fb.center_freqs_hz);

  // H = ln T - (sum S ln S) / T with T = sum S, accumulated row by row.
  std::vector<double> total(x.size(), 0.0);
  std::vector<double> weighted(x.size(), 0.0);
  const CwtNorm norm = cfg.method == SpectrogramKind::cwt_l1 ? CwtNorm::l1 : CwtNorm::l2;
  for_each_cwt_row(x, fb, norm, [&](std::size_t k, std::span<const std::complex<double>> row) {
    if (k < band.k1 || k >= band.k2) return;
    for (std::size_t n = 0; n < row.size(); ++n) {
      const double s = 0.5 * std::norm(row[n]);
      if (s > 0.0) {
        total[n] += s;
        weighted[n] += s * std::log(s);
      }
    }
  });
  const std::size_t bins = band.bin_count();
  out.values.resize(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double h = total[n] > 0.0 ? std::log(total[n]) - weighted[n] / total[n] : std::log(static_cast<double>(bins));
    out.values[n] = clamp_entropy(h, bins);
  }
  out.bin_count = bins;
  out.time_offset_samples = 0;
  return out;
}

}  // namespace sedetect
