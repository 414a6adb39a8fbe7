#include "sedetect/simulation.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <string>

#include "sedetect/audio_io.hpp"
#include "sedetect/errors.hpp"
#include "sedetect/fft.hpp"
#include "sedetect/kmeans_detector.hpp"

namespace sedetect {

void SweepSpec::validate() const {
  if (!(sample_rate_hz > 0.0)) throw InvalidInput("sweep: sample rate must be positive");
  if (!(f_start_hz > 0.0) || !(f_start_hz < f_end_hz) || f_end_hz > sample_rate_hz / 2.0) {
    throw InvalidInput("sweep: need 0 < f_start < f_end <= fs/2");
  }
  if (!(duration_s > 0.0)) throw InvalidInput("sweep: duration must be positive");
  if (!(duty_fraction > 0.0) || duty_fraction > 1.0) throw InvalidInput("sweep: duty fraction must lie in (0, 1]");
  if (pulse_count < 1) throw InvalidInput("sweep: pulse count must be >= 1");
}

SweepSignal gen_pulsed_fm_sweep(const SweepSpec& spec) {
  spec.validate();
  const auto n = static_cast<std::size_t>(std::llround(spec.duration_s * spec.sample_rate_hz));
  const auto count = static_cast<std::size_t>(spec.pulse_count);
  const auto on_total = static_cast<std::size_t>(std::floor(spec.duty_fraction * static_cast<double>(n) + 1e-9));
  const std::size_t per_pulse = on_total / count;
  if (per_pulse < 1) {
    throw InvalidInput("sweep: duty * duration gives " + std::to_string(on_total) + " samples for " +
                       std::to_string(count) + " pulses");
  }
  const std::size_t slot = n / count;

  std::vector<double> chirp(per_pulse);
  const double fs = spec.sample_rate_hz;
  const double span_s = per_pulse > 1 ? static_cast<double>(per_pulse - 1) / fs : 1.0 / fs;
  const double rate = (spec.f_end_hz - spec.f_start_hz) / span_s;
  for (std::size_t i = 0; i < per_pulse; ++i) {
    const double t = static_cast<double>(i) / fs;
    chirp[i] = std::cos(2.0 * std::numbers::pi * (spec.f_start_hz * t + 0.5 * rate * t * t));
  }

  SweepSignal out;
  out.signal.sample_rate_hz = fs;
  out.signal.samples.assign(n, 0.0);
  out.mask.total_len = n;
  out.mask.indices.reserve(per_pulse * count);
  for (std::size_t p = 0; p < count; ++p) {
    const std::size_t start = p * slot + (slot - per_pulse) / 2;
    for (std::size_t i = 0; i < per_pulse; ++i) {
      out.signal.samples[start + i] = chirp[i];
      out.mask.indices.push_back(start + i);
    }
  }
  return out;
}

std::vector<double> fft_bandpass(std::span<const double> x, double sample_rate_hz, FrequencyBand band) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  FftPlan forward(n, FftDirection::forward);
  FftPlan backward(n, FftDirection::backward);
  auto buf = forward.buffer();
  for (std::size_t i = 0; i < n; ++i) buf[i] = x[i];
  forward.execute_inplace();
  auto out_buf = backward.buffer();
  const double df = sample_rate_hz / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double f = static_cast<double>(std::min(k, n - k)) * df;
    out_buf[k] = (f < band.low_hz || f > band.high_hz) ? std::complex<double>{} : buf[k];
  }
  backward.execute_inplace();
  std::vector<double> y(n);
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = out_buf[i].real() * inv;
  return y;
}

namespace {

double masked_band_power(const TimeSeries& x, FrequencyBand band, const PresenceMask& mask) {
  const std::vector<double> y = fft_bandpass(x.samples, x.sample_rate_hz, band);
  double acc = 0.0;
  for (std::size_t i : mask.indices) acc += y[i] * y[i];
  return acc / static_cast<double>(mask.count());
}

void check_pair(const TimeSeries& x, const TimeSeries& w, const PresenceMask& mask) {
  x.validate();
  w.validate();
  if (x.size() != w.size()) throw InvalidInput("snr: signal and noise lengths differ");
  if (x.sample_rate_hz != w.sample_rate_hz) throw InvalidInput("snr: signal and noise sample rates differ");
  if (mask.total_len != x.size()) throw InvalidInput("snr: mask length differs from series length");
  mask.validate();
  if (mask.count() == 0) throw UndefinedQuantity("snr: empty mask");
}

}  // namespace

double band_limited_snr(const TimeSeries& x, const TimeSeries& w, FrequencyBand band, const PresenceMask& mask) {
  check_pair(x, w, mask);
  const double pw = masked_band_power(w, band, mask);
  if (!(pw > 0.0)) throw UndefinedQuantity("snr: zero in-band noise power");
  const double px = masked_band_power(x, band, mask);
  return 10.0 * std::log10(px / pw);
}

MixResult mix_at_snr(const TimeSeries& x, const TimeSeries& w, const SnrSpec& snr, const PresenceMask& mask) {
  check_pair(x, w, mask);
  if (std::isnan(snr.target_db) || snr.target_db == std::numeric_limits<double>::infinity()) {
    throw InvalidInput("mix: target SNR must be finite or -infinity");
  }
  MixResult out;
  out.mixture = w;
  if (snr.target_db == -std::numeric_limits<double>::infinity()) return out;

  const double pw = masked_band_power(w, snr.band, mask);
  if (!(pw > 0.0)) throw UndefinedQuantity("mix: zero in-band noise power");
  const double px = masked_band_power(x, snr.band, mask);
  if (!(px > 0.0)) throw UndefinedQuantity("mix: zero in-band signal power");
  out.signal_gain = std::sqrt(std::pow(10.0, snr.target_db / 10.0) * pw / px);
  for (std::size_t i = 0; i < x.size(); ++i) out.mixture.samples[i] += out.signal_gain * x.samples[i];
  return out;
}

TimeSeries surrogate_noise(std::size_t n, double sample_rate_hz, std::uint64_t seed, double highpass_hz) {
  if (n == 0) throw InvalidInput("noise: length must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> w(n);
  for (double& v : w) v = dist(rng);
  TimeSeries out;
  out.sample_rate_hz = sample_rate_hz;
  out.samples = highpass_hz > 0.0 ? highpass_zero_phase(w, sample_rate_hz, highpass_hz) : std::move(w);
  double ms = 0.0;
  for (double v : out.samples) ms += v * v;
  const double g = 1.0 / std::sqrt(ms / static_cast<double>(n));
  for (double& v : out.samples) v *= g;
  return out;
}

CellOutcome evaluate_cell(std::span<const double> entropy, std::size_t window_length, double p,
                          const PresenceMask& mask) {
  CellOutcome out;
  out.filtered_entropy = median_filter(entropy, MedianFilterSpec{window_length});
  const KMeansResult km = kmeans_two_class(out.filtered_entropy);
  out.separation = km.means.separation();
  out.converged = km.means.converged;
  try {
    const double g = sigmoid_gain(p, km.means);
    out.scores = soft_classify(out.filtered_entropy, km.means, g);
  } catch (const DegenerateClusters&) {
    // No usable boundary: report the uninformative detector.
    out.degenerate = true;
    out.scores.assign(entropy.size(), 0.5);
  }
  out.rates = soft_rates(out.scores, mask);
  return out;
}

GridResult run_grid(const TimeSeries& noise, const SweepSpec& sweep, const GridConfig& cfg) {
  const SweepSignal sig = gen_pulsed_fm_sweep(sweep);
  if (noise.size() != sig.signal.size() || noise.sample_rate_hz != sig.signal.sample_rate_hz) {
    throw InvalidInput("grid: noise must match the sweep length and sample rate");
  }
  for (std::size_t m : cfg.window_lengths) MedianFilterSpec{m}.validate();

  std::map<std::pair<SpectrogramKind, double>, std::vector<double>> entropy_cache;
  for (double snr : cfg.snrs_db) {
    const MixResult mix = mix_at_snr(sig.signal, noise, SnrSpec{snr, cfg.snr_band}, sig.mask);
    for (SpectrogramKind method : cfg.methods) {
      EntropyConfig ec = cfg.entropy;
      ec.method = method;
      entropy_cache[{method, snr}] = entropy_from_audio(mix.mixture, ec).values;
    }
  }

  GridResult result;
  for (SpectrogramKind method : cfg.methods) {
    for (std::size_t m : cfg.window_lengths) {
      for (double snr : cfg.snrs_db) {
        const CellOutcome cell = evaluate_cell(entropy_cache.at({method, snr}), m, cfg.p, sig.mask);
        result.rows.push_back(GridRow{method, snr, m, cell.rates.stpr, cell.rates.stnr, cell.separation,
                                      cell.converged, cell.degenerate});
      }
    }
  }
  return result;
}

void write_grid_csv(std::ostream& os, const GridResult& result) {
  os << "method,snr_db,M,stpr,stnr,separation\n";
  char line[256];
  for (const GridRow& r : result.rows) {
    std::snprintf(line, sizeof line, "%s,%g,%zu,%.6f,%.6f,%.6f\n", to_string(r.method).c_str(), r.snr_db,
                  r.window_length, r.stpr, r.stnr, r.separation);
    os << line;
  }
}

}  // namespace sedetect
