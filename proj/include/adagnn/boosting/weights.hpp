#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace adagnn::boosting {

class BoostError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the R2 update when the average loss reaches 0.5.
class WeakLearningViolation : public BoostError {
 public:
  explicit WeakLearningViolation(double average_loss);
  double average_loss;
};

inline constexpr double kScoreFloor = 1e-12;
inline constexpr double kScoreCeil = 1.0 - 1e-12;

/// n entries of 1/n.
std::vector<double> init_weights(std::size_t n);

/// Divides by the sum. Throws when the sum is not positive and finite.
void renormalize(std::vector<double>& weights);

/// Caps every weight at `cap` and hands the excess to the uncapped entries in
/// proportion to their weight, repeating until no entry exceeds the cap.
/// Input must already sum to 1; a cap below 1/n is impossible and throws.
void cap_weights(std::vector<double>& weights, double cap = 0.5);

/// Two-class coded term: log-odds of s for label 1, negated for label 0.
double samme_r_coded_term(int label, double score);

/// w_i * exp(-alpha/2 * coded_i), renormalized to sum 1. Scores are clamped to
/// [1e-12, 1-1e-12].
std::vector<double> samme_r_update(std::span<const double> weights, std::span<const int> labels,
                                   std::span<const double> scores, double alpha);

/// Multi-class SAMME.R update for distribution labels over C classes:
/// w_i * exp(-alpha (C-1)/C * y_coded_i . log r_i), y_coded = (C y - 1)/(C - 1).
/// For C = 2 and one-hot labels this equals samme_r_update.
std::vector<double> samme_r_node_update(std::span<const double> weights,
                                        std::span<const std::vector<double>> labels,
                                        std::span<const std::vector<double>> predictions, double alpha);

struct R2Round {
  std::vector<double> weights;  // renormalized
  double average_loss = 0.0;
  double beta = 0.0;
  double coefficient = 0.0;  // log(1/beta)
  bool perfect = false;      // every loss was zero
  std::vector<std::size_t> bootstrap;  // indices for the next round's training set
};

/// Largest coefficient a perfect learner receives (beta is floored at 1e-12).
inline constexpr double kPerfectCoefficient = 27.631021115928547;

/// One AdaBoost.R2 step from per-example losses in [0,1] (no normalization).
/// Throws WeakLearningViolation when the weighted average loss is >= 0.5.
/// A perfect round (all losses zero) keeps the weights and flags `perfect`.
R2Round adaboost_r2_update(std::span<const double> weights, std::span<const double> losses, std::uint64_t seed);

/// Linear losses |y - s|, divided by their maximum when it is positive.
std::vector<double> r2_linear_losses(std::span<const int> labels, std::span<const double> scores);

/// adaboost_r2_update over max-normalized linear losses.
R2Round adaboost_r2_round(std::span<const double> weights, std::span<const int> labels,
                          std::span<const double> scores, std::uint64_t seed);

/// n indices drawn with replacement, probability proportional to weight.
std::vector<std::size_t> weighted_bootstrap(std::span<const double> weights, std::size_t n, std::uint64_t seed);

}  // namespace adagnn::boosting
