#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sedetect/audio_io.hpp"
#include "sedetect/entropy.hpp"
#include "sedetect/evaluation.hpp"
#include "sedetect/kmeans_detector.hpp"
#include "sedetect/simulation.hpp"

namespace sedetect::app {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kIoError = 2,
  kDegenerateClusters = 3,
  kInvalidInput = 4,
};

// Shared detector parameters. Defaults follow the field-data setup:
// L1 CWT, band 130-1000 Hz, M = 501, p = 0.95, threshold 0.1.
struct DetectorConfig {
  EntropyConfig entropy{.method = SpectrogramKind::cwt_l1,
                        .window = {},
                        .gamma = 50.0,
                        .beta = 40.0,
                        .voices_per_octave = 40,
                        .band = {130.0, 1000.0}};
  std::size_t median_window{501};
  double p{0.95};
  double threshold{0.1};
  double min_separation{0.3};
  KMeansConfig kmeans;
  PreprocessSpec preprocess;
  bool preprocess_enabled{true};
};

enum class DetectStatus { ok, no_points_of_interest, degenerate_clusters };
std::string to_string(DetectStatus status);

struct DetectionReport {
  DetectStatus status{DetectStatus::ok};
  std::string source;
  double sample_rate_hz{0.0};
  std::size_t sample_count{0};
  ClassMeans means;
  double boundary{0.0};
  double gain{0.0};
  std::vector<double> scores;      // c_s per sample (empty when degenerate)
  std::vector<Interval> intervals; // c_s > threshold, merged
  DetectorConfig config;
  std::optional<HardRates> hard_rates;  // when annotations were supplied
  std::optional<SoftRates> soft_rates;
};

// Runs the detector on an in-memory series (already preprocessed if the
// caller wants that; config.preprocess_enabled is honoured here too).
DetectionReport detect(const TimeSeries& audio, const DetectorConfig& cfg,
                       const std::optional<AnnotationSet>& annotations = std::nullopt);

// JSON text of the report. Scores are omitted when include_scores is false.
std::string report_to_json(const DetectionReport& report, bool include_scores);
void write_intervals_csv(std::ostream& os, const std::vector<Interval>& intervals);

struct SimulateConfig {
  SweepSpec sweep;
  GridConfig grid;
  std::uint64_t seed{7};
  std::optional<std::filesystem::path> noise_file;  // WAV, preprocessed to the sweep rate

  SimulateConfig();
};

// Noise for the grid: the surrogate, or the supplied recording cropped or
// tiled to the sweep length.
TimeSeries simulation_noise(const SimulateConfig& cfg);
GridResult simulate(const SimulateConfig& cfg);

struct RocRun {
  RocCurve baseline;  // STFT entropy, no median filter, thresholds over [min, max]
  RocCurve proposed;  // detector soft output, thresholds over [0, 1]
  RocCurve bled;      // in-band STFT energy
};

// Baseline and BLED use the STFT window in cfg.entropy.window over the same
// band as the proposed detector.
RocRun roc(const TimeSeries& audio, const AnnotationSet& annotations, const DetectorConfig& cfg,
           std::size_t n_thresholds = 200);

// Baseline STFT entropy and BLED energy, both expanded to one value per sample.
std::vector<double> baseline_entropy(const TimeSeries& audio, const EntropyConfig& cfg);
std::vector<double> bled_per_sample(const TimeSeries& audio, const EntropyConfig& cfg);

}  // namespace sedetect::app
