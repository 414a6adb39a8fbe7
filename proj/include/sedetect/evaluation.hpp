#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "sedetect/entropy.hpp"
#include "sedetect/tf_decomposition.hpp"

namespace sedetect {

// Sorted set of sample indices where the reference signal is present.
struct PresenceMask {
  std::vector<std::size_t> indices;
  std::size_t total_len{0};

  std::size_t count() const noexcept { return indices.size(); }
  std::vector<std::uint8_t> to_flags() const;
  static PresenceMask from_flags(std::span<const std::uint8_t> flags);

  void validate() const;
};

enum class Polarity { higher_is_signal, lower_is_signal };

struct ScoreSeries {
  std::vector<double> values;
  Polarity polarity{Polarity::higher_is_signal};
};

struct SoftRates {
  double stpr{0.0};
  double stnr{0.0};
};

// STPR = mean of c_s over the mask, STNR = mean of 1 - c_s off the mask.
SoftRates soft_rates(std::span<const double> c_s, const PresenceMask& mask);

struct HardRates {
  double tpr{0.0};
  double fpr{0.0};
};

HardRates hard_rates(std::span<const std::uint8_t> detections, const PresenceMask& mask);

struct RocPoint {
  double threshold{0.0};
  double tpr{0.0};
  double fpr{0.0};
};

struct RocCurve {
  std::vector<RocPoint> points;  // thresholds ascending
  bool degenerate{false};        // constant score: single point
};

// Linearly spaced thresholds over [min, max] of the score, or over `range`
// when given (e.g. [0, 1] for pseudo-probabilities). Detection is
// score >= t for higher_is_signal and score <= t for lower_is_signal.
RocCurve roc_sweep(const ScoreSeries& score, const PresenceMask& mask, std::size_t n_thresholds = 200,
                   std::optional<std::pair<double, double>> range = std::nullopt);

// Largest TPR among curve points with FPR <= max_fpr (0 if none).
double tpr_at_fpr(const RocCurve& curve, double max_fpr);

void write_roc_csv(std::ostream& os, const RocCurve& curve);

// Per-column sum of S over the band rows.
ScoreSeries bled_score(const PowerSpectrogram& S, const BandSelection& band);

}  // namespace sedetect
