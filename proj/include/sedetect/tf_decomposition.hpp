#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sedetect/series.hpp"

namespace sedetect {

enum class WindowKind { hamming, rectangular };

struct WindowSpec {
  WindowKind kind{WindowKind::hamming};
  std::size_t length_samples{256};
  std::size_t overlap_samples{255};
  std::size_t fft_size{256};  // >= length_samples; extra bins come from zero padding

  std::size_t hop() const noexcept { return length_samples - overlap_samples; }
  void validate() const;
};

// Window coefficients. Hamming is the symmetric form 0.54 - 0.46 cos(2 pi n / (N-1)).
std::vector<double> make_window(WindowKind kind, std::size_t length);

// Generalized Morse wavelet filterbank parameters.
struct MorseFilterbankSpec {
  double gamma{50.0};
  double beta{40.0};
  int voices_per_octave{40};
  double f_low_hz{150.0};
  double f_high_hz{1000.0};
  double sample_rate_hz{2000.0};

  void validate() const;
};

// Peak radian frequency of the mother wavelet, (beta/gamma)^(1/gamma).
double morse_peak_frequency(double gamma, double beta);

// Mother-wavelet frequency response Psi(w) = alpha w^beta exp(-w^gamma) for
// w > 0 and 0 otherwise, with alpha chosen so Psi(peak) == 2.
double morse_response(double gamma, double beta, double omega);

// Number of filters for a spec: centre frequencies run from f_high downward
// by a factor 2^(-1/vpo) while they stay >= f_low.
std::size_t morse_filter_count(const MorseFilterbankSpec& spec);

// Nonzero support of one filter on the length-L FFT grid. Bins outside
// [first_bin, first_bin + values.size()) are exactly zero.
struct FilterResponse {
  std::size_t first_bin{0};
  std::vector<double> values;

  double at(std::size_t bin) const noexcept {
    return (bin >= first_bin && bin - first_bin < values.size()) ? values[bin - first_bin] : 0.0;
  }
};

struct MorseFilterbank {
  MorseFilterbankSpec spec;
  std::size_t signal_len{0};
  double peak_omega{0.0};                  // mother wavelet peak, rad/sample at unit scale
  std::vector<double> center_freqs_hz;     // descending, one per filter
  std::vector<double> scales;              // ascending; s[k+1]/s[k] = 2^(1/vpo)
  std::vector<FilterResponse> responses;   // sampled on the length-signal_len FFT grid

  std::size_t size() const noexcept { return scales.size(); }

  // Continuous response of filter k at a frequency in Hz.
  double response_at_hz(std::size_t k, double freq_hz) const;
};

// Filters cover [f_low, f_high]; responses are sampled on the FFT grid of
// a length-signal_len signal. For even lengths the Nyquist bin gets half the
// response because it stands for both +pi and -pi.
MorseFilterbank design_morse_filterbank(const MorseFilterbankSpec& spec, std::size_t signal_len);

enum class SpectrogramKind { stft, cwt_l1, cwt_l2 };

std::string to_string(SpectrogramKind kind);
// Accepts "stft", "cwt_l1", "cwt_l2".
SpectrogramKind parse_spectrogram_kind(const std::string& name);

// Metadata shared by complex and power spectrograms.
struct SpectrogramAxes {
  std::vector<double> freq_axis_hz;    // one entry per row, strictly monotone
  double sample_rate_hz{0.0};
  std::size_t hop{1};                  // input samples between columns
  std::size_t time_offset_samples{0};  // input sample that column 0 represents
  std::size_t fft_size{0};             // STFT only
  std::size_t window_length{0};        // STFT only
};

struct ComplexSpectrogram {
  Matrix<std::complex<double>> values;  // [frequency x time]
  SpectrogramAxes axes;
  SpectrogramKind normalization{SpectrogramKind::stft};
};

enum class PowerConvention { stft_periodogram, cwt_equiv_sinusoid };

struct PowerSpectrogram {
  Matrix<double> values;
  SpectrogramAxes axes;
  PowerConvention convention{PowerConvention::stft_periodogram};
};

// Column m is the one-sided DFT (bins 0..fft_size/2) of the windowed frame
// starting at sample m*hop. Columns are aligned to the frame centre:
// time_offset_samples = length/2.
ComplexSpectrogram compute_stft(const TimeSeries& x, const WindowSpec& win);

// Streams the same frames as compute_stft without materializing the matrix.
// The callback receives the column index and the one-sided spectrum.
void for_each_stft_frame(const TimeSeries& x, const WindowSpec& win,
                         const std::function<void(std::size_t, std::span<const std::complex<double>>)>& fn);

std::size_t stft_frame_count(std::size_t signal_len, const WindowSpec& win);
std::vector<double> stft_freq_axis(const WindowSpec& win, double sample_rate_hz);

// |X|^2 / N with N the window length.
PowerSpectrogram stft_power(const ComplexSpectrogram& spec);

enum class CwtNorm { l1, l2 };

// Row k = IFFT(FFT(x) * response_k), times sqrt(s_k) for L2. Circular
// convolution: the first/last few wavelet lengths of each row see wrapped
// data.
ComplexSpectrogram compute_cwt(const TimeSeries& x, const MorseFilterbank& fb, CwtNorm norm);

// Streams CWT rows; fn receives the filter index and the coefficient row.
void for_each_cwt_row(const TimeSeries& x, const MorseFilterbank& fb, CwtNorm norm,
                      const std::function<void(std::size_t, std::span<const std::complex<double>>)>& fn);

// Equivalent sinusoidal power, |X|^2 / 2.
PowerSpectrogram cwt_equiv_power(const ComplexSpectrogram& spec);

}  // namespace sedetect
