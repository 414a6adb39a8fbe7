#include "sedetect/tf_decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sedetect/errors.hpp"
#include "sedetect/fft.hpp"

namespace sedetect {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Responses below this are stored as exact zeros (peak value is 2).
constexpr double kResponseFloor = 1e-17;

}  // namespace

void WindowSpec::validate() const {
  if (length_samples == 0) throw InvalidInput("window: length must be positive");
  if (overlap_samples >= length_samples) throw InvalidInput("window: overlap must be < length");
  if (fft_size < length_samples) throw InvalidInput("window: fft_size must be >= length");
}

std::vector<double> make_window(WindowKind kind, std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (kind == WindowKind::hamming && length > 1) {
    const double denom = static_cast<double>(length - 1);
    for (std::size_t n = 0; n < length; ++n) {
      w[n] = 0.54 - 0.46 * std::cos(kTwoPi * static_cast<double>(n) / denom);
    }
  }
  return w;
}

void MorseFilterbankSpec::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidInput("morse: gamma must be positive");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidInput("morse: beta must be positive");
  if (voices_per_octave < 1) throw InvalidInput("morse: voices per octave must be >= 1");
  if (!(sample_rate_hz > 0.0)) throw InvalidInput("morse: sample rate must be positive");
  if (!(f_low_hz > 0.0)) throw InvalidInput("morse: f_low must be positive");
  if (!(f_low_hz < f_high_hz)) throw InvalidInput("morse: f_low must be < f_high");
  if (f_high_hz > sample_rate_hz / 2.0) throw InvalidInput("morse: f_high above Nyquist");
}

double morse_peak_frequency(double gamma, double beta) { return std::pow(beta / gamma, 1.0 / gamma); }

double morse_response(double gamma, double beta, double omega) {
  if (!(omega > 0.0)) return 0.0;
  const double u = std::log(omega / morse_peak_frequency(gamma, beta));
  // ln(alpha w^beta e^{-w^gamma}) with the peak value pinned at 2.
  const double log_psi = std::numbers::ln2 + beta * u - (beta / gamma) * std::expm1(gamma * u);
  return std::exp(log_psi);
}

std::size_t morse_filter_count(const MorseFilterbankSpec& spec) {
  spec.validate();
  const double octaves = std::log2(spec.f_high_hz / spec.f_low_hz);
  return static_cast<std::size_t>(std::floor(spec.voices_per_octave * octaves + 1e-9)) + 1;
}

double MorseFilterbank::response_at_hz(std::size_t k, double freq_hz) const {
  const double omega = kTwoPi * freq_hz / spec.sample_rate_hz;
  return morse_response(spec.gamma, spec.beta, scales.at(k) * omega);
}

MorseFilterbank design_morse_filterbank(const MorseFilterbankSpec& spec, std::size_t signal_len) {
  spec.validate();
  if (signal_len == 0) throw InvalidInput("morse: signal length must be positive");

  MorseFilterbank fb;
  fb.spec = spec;
  fb.signal_len = signal_len;
  fb.peak_omega = morse_peak_frequency(spec.gamma, spec.beta);

  const std::size_t count = morse_filter_count(spec);
  const double L = static_cast<double>(signal_len);
  const std::size_t last_positive = signal_len / 2;  // Nyquist bin when L is even
  const bool has_nyquist = signal_len % 2 == 0;

  fb.center_freqs_hz.reserve(count);
  fb.scales.reserve(count);
  fb.responses.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double fc = spec.f_high_hz * std::exp2(-static_cast<double>(k) / spec.voices_per_octave);
    const double scale = fb.peak_omega * spec.sample_rate_hz / (kTwoPi * fc);
    fb.center_freqs_hz.push_back(fc);
    fb.scales.push_back(scale);

    FilterResponse resp;
    if (last_positive >= 1) {
      auto value = [&](std::size_t bin) {
        double v = morse_response(spec.gamma, spec.beta, scale * kTwoPi * static_cast<double>(bin) / L);
        if (has_nyquist && bin == last_positive) v *= 0.5;
        return v;
      };
      // Psi is unimodal, so the support is one contiguous run around the centre bin.
      const auto centre = static_cast<std::size_t>(std::llround(fc / spec.sample_rate_hz * L));
      const std::size_t c = std::clamp<std::size_t>(centre, 1, last_positive);
      std::size_t lo = c;
      std::size_t hi = c;
      while (lo > 1 && value(lo - 1) >= kResponseFloor) --lo;
      while (hi < last_positive && value(hi + 1) >= kResponseFloor) ++hi;
      resp.first_bin = lo;
      resp.values.reserve(hi - lo + 1);
      for (std::size_t j = lo; j <= hi; ++j) {
        const double v = value(j);
        resp.values.push_back(v >= kResponseFloor ? v : 0.0);
      }
    }
    fb.responses.push_back(std::move(resp));
  }
  return fb;
}

std::string to_string(SpectrogramKind kind) {
  switch (kind) {
    case SpectrogramKind::stft:
      return "stft";
    case SpectrogramKind::cwt_l1:
      return "cwt_l1";
    case SpectrogramKind::cwt_l2:
      return "cwt_l2";
  }
  return "unknown";
}

SpectrogramKind parse_spectrogram_kind(const std::string& name) {
  if (name == "stft") return SpectrogramKind::stft;
  if (name == "cwt_l1") return SpectrogramKind::cwt_l1;
  if (name == "cwt_l2") return SpectrogramKind::cwt_l2;
  throw InvalidInput("unknown method '" + name + "' (expected stft, cwt_l1 or cwt_l2)");
}

std::size_t stft_frame_count(std::size_t signal_len, const WindowSpec& win) {
  win.validate();
  if (signal_len < win.length_samples) return 0;
  return (signal_len - win.length_samples) / win.hop() + 1;
}

std::vector<double> stft_freq_axis(const WindowSpec& win, double sample_rate_hz) {
  std::vector<double> axis(win.fft_size / 2 + 1);
  for (std::size_t k = 0; k < axis.size(); ++k) {
    axis[k] = static_cast<double>(k) * sample_rate_hz / static_cast<double>(win.fft_size);
  }
  return axis;
}

void for_each_stft_frame(const TimeSeries& x, const WindowSpec& win,
                         const std::function<void(std::size_t, std::span<const std::complex<double>>)>& fn) {
  win.validate();
  x.validate();
  if (x.size() < win.length_samples) {
    throw InvalidInput("stft: input (" + std::to_string(x.size()) + " samples) shorter than window (" +
                       std::to_string(win.length_samples) + ")");
  }
  const std::vector<double> w = make_window(win.kind, win.length_samples);
  const std::size_t frames = stft_frame_count(x.size(), win);
  const std::size_t bins = win.fft_size / 2 + 1;
  FftPlan plan(win.fft_size, FftDirection::forward);
  auto buf = plan.buffer();
  for (std::size_t m = 0; m < frames; ++m) {
    const std::size_t start = m * win.hop();
    for (std::size_t n = 0; n < win.length_samples; ++n) buf[n] = x.samples[start + n] * w[n];
    std::fill(buf.begin() + static_cast<std::ptrdiff_t>(win.length_samples), buf.end(), std::complex<double>{});
    plan.execute_inplace();
    fn(m, buf.first(bins));
  }
}

ComplexSpectrogram compute_stft(const TimeSeries& x, const WindowSpec& win) {
  win.validate();
  const std::size_t frames = x.size() >= win.length_samples ? stft_frame_count(x.size(), win) : 0;
  ComplexSpectrogram out;
  out.values = Matrix<std::complex<double>>(win.fft_size / 2 + 1, frames);
  for_each_stft_frame(x, win, [&](std::size_t m, std::span<const std::complex<double>> col) {
    for (std::size_t k = 0; k < col.size(); ++k) out.values(k, m) = col[k];
  });
  out.axes.freq_axis_hz = stft_freq_axis(win, x.sample_rate_hz);
  out.axes.sample_rate_hz = x.sample_rate_hz;
  out.axes.hop = win.hop();
  out.axes.time_offset_samples = win.length_samples / 2;
  out.axes.fft_size = win.fft_size;
  out.axes.window_length = win.length_samples;
  out.normalization = SpectrogramKind::stft;
  return out;
}

PowerSpectrogram stft_power(const ComplexSpectrogram& spec) {
  if (spec.normalization != SpectrogramKind::stft) {
    throw ContractError("stft_power: spectrogram is " + to_string(spec.normalization) + ", expected stft");
  }
  if (spec.axes.window_length == 0) throw ContractError("stft_power: missing window length");
  PowerSpectrogram out;
  out.values = Matrix<double>(spec.values.rows, spec.values.cols);
  const double inv_n = 1.0 / static_cast<double>(spec.axes.window_length);
  for (std::size_t i = 0; i < spec.values.data.size(); ++i) out.values.data[i] = std::norm(spec.values.data[i]) * inv_n;
  out.axes = spec.axes;
  out.convention = PowerConvention::stft_periodogram;
  return out;
}

void for_each_cwt_row(const TimeSeries& x, const MorseFilterbank& fb, CwtNorm norm,
                      const std::function<void(std::size_t, std::span<const std::complex<double>>)>& fn) {
  x.validate();
  if (fb.signal_len != x.size()) {
    throw ContractError("cwt: filterbank built for " + std::to_string(fb.signal_len) + " samples, signal has " +
                        std::to_string(x.size()));
  }
  const std::size_t L = x.size();
  FftPlan forward(L, FftDirection::forward);
  auto fbuf = forward.buffer();
  for (std::size_t n = 0; n < L; ++n) fbuf[n] = x.samples[n];
  forward.execute_inplace();
  const std::vector<std::complex<double>> spectrum(fbuf.begin(), fbuf.end());

  FftPlan backward(L, FftDirection::backward);
  auto buf = backward.buffer();
  for (std::size_t k = 0; k < fb.size(); ++k) {
    std::fill(buf.begin(), buf.end(), std::complex<double>{});
    const FilterResponse& r = fb.responses[k];
    for (std::size_t i = 0; i < r.values.size(); ++i) {
      const std::size_t bin = r.first_bin + i;
      buf[bin] = spectrum[bin] * r.values[i];
    }
    backward.execute_inplace();
    double scale = 1.0 / static_cast<double>(L);
    if (norm == CwtNorm::l2) scale *= std::sqrt(fb.scales[k]);
    for (auto& v : buf) v *= scale;
    fn(k, buf);
  }
}

ComplexSpectrogram compute_cwt(const TimeSeries& x, const MorseFilterbank& fb, CwtNorm norm) {
  ComplexSpectrogram out;
  out.values = Matrix<std::complex<double>>(fb.size(), x.size());
  for_each_cwt_row(x, fb, norm, [&](std::size_t k, std::span<const std::complex<double>> row) {
    std::copy(row.begin(), row.end(), out.values.row(k).begin());
  });
  out.axes.freq_axis_hz = fb.center_freqs_hz;
  out.axes.sample_rate_hz = x.sample_rate_hz;
  out.axes.hop = 1;
  out.axes.time_offset_samples = 0;
  out.normalization = norm == CwtNorm::l1 ? SpectrogramKind::cwt_l1 : SpectrogramKind::cwt_l2;
  return out;
}

PowerSpectrogram cwt_equiv_power(const ComplexSpectrogram& spec) {
  if (spec.normalization == SpectrogramKind::stft) {
    throw ContractError("cwt_equiv_power: spectrogram is stft, expected a CWT");
  }
  PowerSpectrogram out;
  out.values = Matrix<double>(spec.values.rows, spec.values.cols);
  for (std::size_t i = 0; i < spec.values.data.size(); ++i) out.values.data[i] = 0.5 * std::norm(spec.values.data[i]);
  out.axes = spec.axes;
  out.convention = PowerConvention::cwt_equiv_sinusoid;
  return out;
}

}  // namespace sedetect
