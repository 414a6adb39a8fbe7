#include "sedetect/app.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include <nlohmann/json.hpp>

#include "sedetect/errors.hpp"

namespace sedetect::app {

std::string to_string(DetectStatus status) {
  switch (status) {
    case DetectStatus::ok:
      return "ok";
    case DetectStatus::no_points_of_interest:
      return "no points of interest";
    case DetectStatus::degenerate_clusters:
      return "degenerate clusters";
  }
  return "unknown";
}

namespace {

TimeSeries prepared(const TimeSeries& audio, const DetectorConfig& cfg) {
  audio.validate();
  if (!cfg.preprocess_enabled) return audio;
  return preprocess(audio, cfg.preprocess).series;
}

std::vector<double> filtered_entropy(const TimeSeries& x, const DetectorConfig& cfg) {
  const EntropySeries h = entropy_from_audio(x, cfg.entropy);
  return median_filter(h.values, MedianFilterSpec{cfg.median_window});
}

void check_detector_config(const DetectorConfig& cfg) {
  MedianFilterSpec{cfg.median_window}.validate();
  if (!(cfg.threshold >= 0.0) || !(cfg.threshold <= 1.0)) throw InvalidInput("threshold must lie in [0, 1]");
  if (!(cfg.min_separation >= 0.0)) throw InvalidInput("min separation must be nonnegative");
  cfg.kmeans.validate();
  cfg.entropy.window.validate();
}

}  // namespace

DetectionReport detect(const TimeSeries& audio, const DetectorConfig& cfg,
                       const std::optional<AnnotationSet>& annotations) {
  check_detector_config(cfg);
  const TimeSeries x = prepared(audio, cfg);
  DetectionReport report;
  report.config = cfg;
  report.sample_rate_hz = x.sample_rate_hz;
  report.sample_count = x.size();

  const std::vector<double> h = filtered_entropy(x, cfg);
  const KMeansResult km = kmeans_two_class(h, cfg.kmeans);
  report.means = km.means;
  report.boundary = decision_boundary(km.means);

  try {
    report.gain = sigmoid_gain(cfg.p, km.means);
  } catch (const DegenerateClusters&) {
    report.status = DetectStatus::degenerate_clusters;
    return report;
  }
  report.scores = soft_classify(h, km.means, report.gain);

  std::vector<std::uint8_t> flags(x.size(), 0);
  if (point_of_interest_test(km.means, cfg.min_separation)) {
    for (std::size_t n = 0; n < flags.size(); ++n) flags[n] = report.scores[n] > cfg.threshold ? 1 : 0;
    report.intervals = intervals_from_flags(flags, x.sample_rate_hz);
  } else {
    report.status = DetectStatus::no_points_of_interest;
  }

  if (annotations) {
    const PresenceMask mask = mask_from_intervals(*annotations, x.sample_rate_hz, x.size());
    if (mask.count() > 0 && mask.count() < mask.total_len) {
      report.hard_rates = hard_rates(flags, mask);
      report.soft_rates = soft_rates(report.scores, mask);
    }
  }
  return report;
}

std::string report_to_json(const DetectionReport& report, bool include_scores) {
  using nlohmann::ordered_json;
  const DetectorConfig& c = report.config;
  ordered_json j;
  j["status"] = to_string(report.status);
  if (!report.source.empty()) j["source"] = report.source;
  j["sample_rate_hz"] = report.sample_rate_hz;
  j["sample_count"] = report.sample_count;
  j["class_means"] = {{"mu_s", report.means.mu_s},
                      {"mu_ns", report.means.mu_ns},
                      {"separation", report.means.separation()},
                      {"converged", report.means.converged},
                      {"iterations", report.means.iterations_used}};
  j["boundary"] = report.boundary;
  j["gain"] = report.gain;

  ordered_json intervals = ordered_json::array();
  for (const Interval& iv : report.intervals) intervals.push_back({{"start_s", iv.start_s}, {"end_s", iv.end_s}});
  j["intervals"] = std::move(intervals);

  ordered_json cfg;
  cfg["method"] = to_string(c.entropy.method);
  cfg["band"] = {c.entropy.band.low_hz, c.entropy.band.high_hz};
  cfg["gamma"] = c.entropy.gamma;
  cfg["beta"] = c.entropy.beta;
  cfg["vpo"] = c.entropy.voices_per_octave;
  cfg["window"] = c.entropy.window.length_samples;
  cfg["overlap"] = c.entropy.window.overlap_samples;
  cfg["fft_size"] = c.entropy.window.fft_size;
  cfg["mf"] = c.median_window;
  cfg["p"] = c.p;
  cfg["threshold"] = c.threshold;
  cfg["min_separation"] = c.min_separation;
  cfg["preprocess"] = c.preprocess_enabled;
  cfg["target_rate_hz"] = c.preprocess.target_rate_hz;
  cfg["highpass_hz"] = c.preprocess.highpass_hz;
  j["config"] = std::move(cfg);

  if (report.hard_rates || report.soft_rates) {
    ordered_json m;
    if (report.hard_rates) {
      m["tpr"] = report.hard_rates->tpr;
      m["fpr"] = report.hard_rates->fpr;
    }
    if (report.soft_rates) {
      m["stpr"] = report.soft_rates->stpr;
      m["stnr"] = report.soft_rates->stnr;
    }
    j["metrics"] = std::move(m);
  }
  if (include_scores) j["scores"] = report.scores;
  return j.dump(2) + "\n";
}

void write_intervals_csv(std::ostream& os, const std::vector<Interval>& intervals) {
  os << "start_s,end_s\n";
  char line[96];
  for (const Interval& iv : intervals) {
    std::snprintf(line, sizeof line, "%.6f,%.6f\n", iv.start_s, iv.end_s);
    os << line;
  }
}

SimulateConfig::SimulateConfig() {
  grid.entropy.band = {150.0, 1000.0};
  grid.snr_band = {150.0, 1000.0};
}

TimeSeries simulation_noise(const SimulateConfig& cfg) {
  cfg.sweep.validate();
  const auto n = static_cast<std::size_t>(std::llround(cfg.sweep.duration_s * cfg.sweep.sample_rate_hz));
  if (!cfg.noise_file) return surrogate_noise(n, cfg.sweep.sample_rate_hz, cfg.seed);

  PreprocessSpec spec;
  spec.target_rate_hz = cfg.sweep.sample_rate_hz;
  const PreprocessResult pre = preprocess(load_wav(*cfg.noise_file), spec);
  if (pre.normalization_skipped) throw InvalidInput("noise file is silent");
  const std::vector<double>& src = pre.series.samples;
  TimeSeries out;
  out.sample_rate_hz = cfg.sweep.sample_rate_hz;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.samples[i] = src[i % src.size()];
  return out;
}

GridResult simulate(const SimulateConfig& cfg) { return run_grid(simulation_noise(cfg), cfg.sweep, cfg.grid); }

std::vector<double> baseline_entropy(const TimeSeries& audio, const EntropyConfig& cfg) {
  EntropyConfig stft = cfg;
  stft.method = SpectrogramKind::stft;
  return entropy_from_audio(audio, stft).values;
}

std::vector<double> bled_per_sample(const TimeSeries& audio, const EntropyConfig& cfg) {
  const WindowSpec& win = cfg.window;
  const BandSelection band = band_indices_stft(cfg.band, win.fft_size, audio.sample_rate_hz);
  const double inv_n = 1.0 / static_cast<double>(win.length_samples);
  std::vector<double> energy(stft_frame_count(audio.size(), win));
  for_each_stft_frame(audio, win, [&](std::size_t m, std::span<const std::complex<double>> col) {
    double e = 0.0;
    for (std::size_t k = band.k1; k < band.k2; ++k) e += std::norm(col[k]) * inv_n;
    energy[m] = e;
  });
  return expand_to_samples(energy, win.length_samples / 2, win.hop(), audio.size());
}

RocRun roc(const TimeSeries& audio, const AnnotationSet& annotations, const DetectorConfig& cfg,
           std::size_t n_thresholds) {
  check_detector_config(cfg);
  const TimeSeries x = prepared(audio, cfg);
  const PresenceMask mask = mask_from_intervals(annotations, x.sample_rate_hz, x.size());

  const std::vector<double> h = filtered_entropy(x, cfg);
  const KMeansResult km = kmeans_two_class(h, cfg.kmeans);
  const double g = sigmoid_gain(cfg.p, km.means);

  RocRun run;
  run.baseline = roc_sweep(ScoreSeries{baseline_entropy(x, cfg.entropy), Polarity::lower_is_signal}, mask, n_thresholds);
  run.proposed = roc_sweep(ScoreSeries{soft_classify(h, km.means, g), Polarity::higher_is_signal}, mask, n_thresholds,
                           std::pair{0.0, 1.0});
  run.bled = roc_sweep(ScoreSeries{bled_per_sample(x, cfg.entropy), Polarity::higher_is_signal}, mask, n_thresholds);
  return run;
}

}  // namespace sedetect::app
