#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace sedetect {

struct KMeansConfig {
  // Convergence threshold on the largest mean change. Unset means
  // 1e-6 * (max(H) - min(H)).
  std::optional<double> epsilon;
  int max_iterations{100};

  void validate() const;
};

struct ClassMeans {
  double mu_s{0.0};   // signal class (low entropy)
  double mu_ns{0.0};  // no-signal class
  bool converged{false};
  int iterations_used{0};

  double separation() const noexcept { return mu_ns - mu_s; }
};

struct KMeansResult {
  ClassMeans means;
  std::vector<std::uint8_t> assignment;  // 1 = signal class
  std::vector<double> objective;         // within-class SSE after each iteration
};

// Two-class Lloyd iteration initialized at min/max. A class that empties
// keeps its previous mean. Ties go to the signal class.
KMeansResult kmeans_two_class(std::span<const double> h, const KMeansConfig& cfg = {});

double decision_boundary(const ClassMeans& means);

// Gain placing c_s(mu_s) at p. Requires p in (0.5, 1) and positive separation.
double sigmoid_gain(double p, const ClassMeans& means);

// Exactly one of p / gain.
struct SoftDetectorConfig {
  std::optional<double> p;
  std::optional<double> gain;

  double resolve_gain(const ClassMeans& means) const;
};

// Logistic sigmoid, evaluated without overflow for large |x|.
double sigmoid(double x);

// c_s(H) = sigmoid(-2 g (H - boundary) / (mu_ns - mu_s)).
double soft_score(double h, const ClassMeans& means, double gain);
std::vector<double> soft_classify(std::span<const double> h, const ClassMeans& means, double gain);

// 1 where H <= boundary.
std::vector<std::uint8_t> hard_classify(std::span<const double> h, const ClassMeans& means);

// True iff k-means converged and the class means are at least min_separation apart.
bool point_of_interest_test(const ClassMeans& means, double min_separation);

}  // namespace sedetect
