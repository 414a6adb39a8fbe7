#include "sedetect/kmeans_detector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sedetect/errors.hpp"

namespace sedetect {

namespace {

// Relative floor under which two class means count as identical.
constexpr double kDegenerateRelative = 1e-12;

void require_separation(const ClassMeans& means) {
  const double sep = means.separation();
  const double scale = std::max({std::abs(means.mu_s), std::abs(means.mu_ns), 1.0});
  if (!(sep > kDegenerateRelative * scale)) {
    throw DegenerateClusters("class means not separated (mu_s=" + std::to_string(means.mu_s) +
                             ", mu_ns=" + std::to_string(means.mu_ns) + ")");
  }
}

}  // namespace

void KMeansConfig::validate() const {
  if (epsilon && !(*epsilon > 0.0)) throw InvalidInput("kmeans: epsilon must be positive");
  if (max_iterations < 1) throw InvalidInput("kmeans: max_iterations must be >= 1");
}

KMeansResult kmeans_two_class(std::span<const double> h, const KMeansConfig& cfg) {
  cfg.validate();
  if (h.empty()) throw InvalidInput("kmeans: empty input");
  const auto [lo_it, hi_it] = std::minmax_element(h.begin(), h.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double eps = cfg.epsilon.value_or(1e-6 * (hi - lo));

  KMeansResult out;
  out.assignment.assign(h.size(), 0);
  double mu_s = lo;
  double mu_ns = hi;
  bool converged = false;
  int it = 0;
  while (it < cfg.max_iterations) {
    ++it;
    double sum_s = 0.0;
    double sum_ns = 0.0;
    std::size_t n_s = 0;
    for (std::size_t m = 0; m < h.size(); ++m) {
      const double ds = h[m] - mu_s;
      const double dn = h[m] - mu_ns;
      const bool signal = ds * ds <= dn * dn;
      out.assignment[m] = signal ? 1 : 0;
      if (signal) {
        sum_s += h[m];
        ++n_s;
      } else {
        sum_ns += h[m];
      }
    }
    const std::size_t n_ns = h.size() - n_s;
    const double next_s = n_s > 0 ? sum_s / static_cast<double>(n_s) : mu_s;
    const double next_ns = n_ns > 0 ? sum_ns / static_cast<double>(n_ns) : mu_ns;
    const double change = std::max(std::abs(next_s - mu_s), std::abs(next_ns - mu_ns));
    mu_s = next_s;
    mu_ns = next_ns;

    double sse = 0.0;
    for (std::size_t m = 0; m < h.size(); ++m) {
      const double d = h[m] - (out.assignment[m] ? mu_s : mu_ns);
      sse += d * d;
    }
    out.objective.push_back(sse);

    if (change <= eps) {
      converged = true;
      break;
    }
  }
  out.means = ClassMeans{mu_s, mu_ns, converged, it};
  return out;
}

double decision_boundary(const ClassMeans& means) { return means.mu_s + (means.mu_ns - means.mu_s) / 2.0; }

double sigmoid_gain(double p, const ClassMeans& means) {
  if (!(p > 0.5) || !(p < 1.0)) throw InvalidInput("sigmoid gain: p must lie in (0.5, 1), got " + std::to_string(p));
  require_separation(means);
  const double beta = decision_boundary(means);
  return 0.5 * (means.mu_ns - means.mu_s) / (means.mu_s - beta) * std::log(1.0 / p - 1.0);
}

double SoftDetectorConfig::resolve_gain(const ClassMeans& means) const {
  if (p.has_value() == gain.has_value()) throw InvalidInput("soft detector: give exactly one of p or gain");
  if (gain) {
    if (!(*gain > 0.0)) throw InvalidInput("soft detector: gain must be positive");
    return *gain;
  }
  return sigmoid_gain(*p, means);
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double soft_score(double h, const ClassMeans& means, double gain) {
  const double beta = decision_boundary(means);
  return sigmoid(-2.0 * gain * (h - beta) / (means.mu_ns - means.mu_s));
}

std::vector<double> soft_classify(std::span<const double> h, const ClassMeans& means, double gain) {
  require_separation(means);
  if (!(gain > 0.0)) throw InvalidInput("soft classify: gain must be positive");
  std::vector<double> out(h.size());
  for (std::size_t m = 0; m < h.size(); ++m) out[m] = soft_score(h[m], means, gain);
  return out;
}

std::vector<std::uint8_t> hard_classify(std::span<const double> h, const ClassMeans& means) {
  const double beta = decision_boundary(means);
  std::vector<std::uint8_t> out(h.size());
  for (std::size_t m = 0; m < h.size(); ++m) out[m] = h[m] <= beta ? 1 : 0;
  return out;
}

bool point_of_interest_test(const ClassMeans& means, double min_separation) {
  return means.converged && means.separation() >= min_separation;
}

}  // namespace sedetect
