#include "sedetect/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <string>
#include <tuple>

#include "sedetect/errors.hpp"

namespace sedetect {

std::vector<std::uint8_t> PresenceMask::to_flags() const {
  std::vector<std::uint8_t> flags(total_len, 0);
  for (std::size_t i : indices) flags.at(i) = 1;
  return flags;
}

PresenceMask PresenceMask::from_flags(std::span<const std::uint8_t> flags) {
  PresenceMask mask;
  mask.total_len = flags.size();
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i]) mask.indices.push_back(i);
  }
  return mask;
}

void PresenceMask::validate() const {
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= total_len) throw InvalidInput("mask: index out of range");
    if (i > 0 && indices[i] <= indices[i - 1]) throw InvalidInput("mask: indices must be strictly increasing");
  }
}

namespace {

void check_rate_inputs(std::size_t n, const PresenceMask& mask) {
  if (n != mask.total_len) {
    throw InvalidInput("rates: series length " + std::to_string(n) + " != mask length " +
                       std::to_string(mask.total_len));
  }
  mask.validate();
  if (mask.count() == 0) throw UndefinedQuantity("rates: mask is empty, positive rate undefined");
  if (mask.count() == mask.total_len) throw UndefinedQuantity("rates: mask is full, negative rate undefined");
}

}  // namespace

SoftRates soft_rates(std::span<const double> c_s, const PresenceMask& mask) {
  check_rate_inputs(c_s.size(), mask);
  const std::vector<std::uint8_t> flags = mask.to_flags();
  double on = 0.0;
  double off = 0.0;
  for (std::size_t n = 0; n < c_s.size(); ++n) {
    if (flags[n]) {
      on += c_s[n];
    } else {
      off += 1.0 - c_s[n];
    }
  }
  const auto pos = static_cast<double>(mask.count());
  const auto neg = static_cast<double>(mask.total_len - mask.count());
  return {on / pos, off / neg};
}

HardRates hard_rates(std::span<const std::uint8_t> detections, const PresenceMask& mask) {
  check_rate_inputs(detections.size(), mask);
  const std::vector<std::uint8_t> flags = mask.to_flags();
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t n = 0; n < detections.size(); ++n) {
    if (!detections[n]) continue;
    if (flags[n]) {
      ++tp;
    } else {
      ++fp;
    }
  }
  return {static_cast<double>(tp) / static_cast<double>(mask.count()),
          static_cast<double>(fp) / static_cast<double>(mask.total_len - mask.count())};
}

RocCurve roc_sweep(const ScoreSeries& score, const PresenceMask& mask, std::size_t n_thresholds,
                   std::optional<std::pair<double, double>> range) {
  if (n_thresholds < 2) throw InvalidInput("roc: need at least 2 thresholds");
  check_rate_inputs(score.values.size(), mask);
  for (double v : score.values) {
    if (!std::isfinite(v)) throw InvalidInput("roc: non-finite score");
  }

  double lo = 0.0;
  double hi = 0.0;
  if (range) {
    std::tie(lo, hi) = *range;
    if (!(lo < hi)) throw InvalidInput("roc: threshold range must be increasing");
  } else {
    const auto [mn, mx] = std::minmax_element(score.values.begin(), score.values.end());
    lo = *mn;
    hi = *mx;
  }

  const std::vector<std::uint8_t> flags = mask.to_flags();
  const auto pos = static_cast<double>(mask.count());
  const auto neg = static_cast<double>(mask.total_len - mask.count());
  auto point_at = [&](double t) {
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (std::size_t n = 0; n < score.values.size(); ++n) {
      const double v = score.values[n];
      const bool detect = score.polarity == Polarity::higher_is_signal ? v >= t : v <= t;
      if (!detect) continue;
      if (flags[n]) {
        ++tp;
      } else {
        ++fp;
      }
    }
    return RocPoint{t, static_cast<double>(tp) / pos, static_cast<double>(fp) / neg};
  };

  RocCurve curve;
  if (!(lo < hi)) {
    curve.degenerate = true;
    curve.points.push_back(point_at(lo));
    return curve;
  }
  curve.points.reserve(n_thresholds);
  const double step = (hi - lo) / static_cast<double>(n_thresholds - 1);
  for (std::size_t i = 0; i < n_thresholds; ++i) {
    const double t = i + 1 == n_thresholds ? hi : lo + step * static_cast<double>(i);
    curve.points.push_back(point_at(t));
  }
  return curve;
}

double tpr_at_fpr(const RocCurve& curve, double max_fpr) {
  double best = 0.0;
  for (const RocPoint& pt : curve.points) {
    if (pt.fpr <= max_fpr) best = std::max(best, pt.tpr);
  }
  return best;
}

void write_roc_csv(std::ostream& os, const RocCurve& curve) {
  os << "threshold,tpr,fpr\n";
  os << std::setprecision(10);
  for (const RocPoint& pt : curve.points) os << pt.threshold << ',' << pt.tpr << ',' << pt.fpr << '\n';
}

ScoreSeries bled_score(const PowerSpectrogram& S, const BandSelection& band) {
  if (band.k2 <= band.k1 || band.k2 > S.values.rows) throw InvalidBand("bled: band outside spectrogram");
  ScoreSeries out;
  out.polarity = Polarity::higher_is_signal;
  out.values.assign(S.values.cols, 0.0);
  for (std::size_t k = band.k1; k < band.k2; ++k) {
    const auto row = S.values.row(k);
    for (std::size_t m = 0; m < row.size(); ++m) out.values[m] += row[m];
  }
  return out;
}

}  // namespace sedetect
