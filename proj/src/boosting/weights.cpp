#include "adagnn/boosting/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace adagnn::boosting {

WeakLearningViolation::WeakLearningViolation(double loss)
    : BoostError("adaboost.r2: average loss " + std::to_string(loss) + " >= 0.5, weak-learning condition violated"),
      average_loss(loss) {}

std::vector<double> init_weights(std::size_t n) {
  if (n == 0) throw BoostError("init_weights: need at least one example");
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

void renormalize(std::vector<double>& weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw BoostError("renormalize: weights sum to " + std::to_string(total));
  }
  for (double& w : weights) w /= total;
}

void cap_weights(std::vector<double>& weights, double cap) {
  if (weights.empty()) return;
  if (cap * static_cast<double>(weights.size()) < 1.0 - 1e-12) {
    throw BoostError("cap_weights: cap " + std::to_string(cap) + " is below 1/n for n = " +
                     std::to_string(weights.size()));
  }
  std::vector<bool> capped(weights.size(), false);
  while (true) {
    double excess = 0.0;
    double free_mass = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!capped[i] && weights[i] > cap) {
        excess += weights[i] - cap;
        weights[i] = cap;
        capped[i] = true;
      }
    }
    if (excess == 0.0) return;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!capped[i]) free_mass += weights[i];
    }
    if (!(free_mass > 0.0)) return;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!capped[i]) weights[i] += excess * weights[i] / free_mass;
    }
  }
}

double samme_r_coded_term(int label, double score) {
  const double s = std::clamp(score, kScoreFloor, kScoreCeil);
  const double log_odds = std::log(s) - std::log1p(-s);
  return label == 1 ? log_odds : -log_odds;
}

std::vector<double> samme_r_update(std::span<const double> weights, std::span<const int> labels,
                                   std::span<const double> scores, double alpha) {
  if (weights.size() != labels.size() || weights.size() != scores.size()) {
    throw BoostError("samme_r_update: " + std::to_string(weights.size()) + " weights, " +
                     std::to_string(labels.size()) + " labels, " + std::to_string(scores.size()) + " scores");
  }
  std::vector<double> out(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw BoostError("samme_r_update: labels must be 0 or 1");
    out[i] = weights[i] * std::exp(-0.5 * alpha * samme_r_coded_term(labels[i], scores[i]));
  }
  renormalize(out);
  return out;
}

std::vector<double> samme_r_node_update(std::span<const double> weights,
                                        std::span<const std::vector<double>> labels,
                                        std::span<const std::vector<double>> predictions, double alpha) {
  if (weights.size() != labels.size() || weights.size() != predictions.size()) {
    throw BoostError("samme_r_node_update: length mismatch");
  }
  std::vector<double> out(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const std::size_t c = labels[i].size();
    if (c < 2 || predictions[i].size() != c) throw BoostError("samme_r_node_update: need >= 2 matching classes");
    const double cd = static_cast<double>(c);
    double dot = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      const double coded = (cd * labels[i][k] - 1.0) / (cd - 1.0);
      dot += coded * std::log(std::clamp(predictions[i][k], kScoreFloor, kScoreCeil));
    }
    out[i] = weights[i] * std::exp(-alpha * (cd - 1.0) / cd * dot);
  }
  renormalize(out);
  return out;
}

std::vector<std::size_t> weighted_bootstrap(std::span<const double> weights, std::size_t n, std::uint64_t seed) {
  if (weights.empty()) throw BoostError("weighted_bootstrap: no weights");
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = pick(rng);
  return out;
}

R2Round adaboost_r2_update(std::span<const double> weights, std::span<const double> losses, std::uint64_t seed) {
  if (weights.size() != losses.size()) throw BoostError("adaboost_r2: weight/loss length mismatch");
  if (weights.empty()) throw BoostError("adaboost_r2: no examples");
  R2Round r;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(losses[i] >= 0.0 && losses[i] <= 1.0)) throw BoostError("adaboost_r2: losses must lie in [0,1]");
    r.average_loss += weights[i] * losses[i];
  }
  if (r.average_loss >= 0.5) throw WeakLearningViolation(r.average_loss);
  r.weights.assign(weights.begin(), weights.end());
  if (r.average_loss == 0.0) {
    r.perfect = true;
    r.beta = 0.0;
    r.coefficient = kPerfectCoefficient;
  } else {
    r.beta = r.average_loss / (1.0 - r.average_loss);
    r.coefficient = std::log(1.0 / r.beta);
    for (std::size_t i = 0; i < weights.size(); ++i) r.weights[i] *= std::pow(r.beta, 1.0 - losses[i]);
  }
  renormalize(r.weights);
  r.bootstrap = weighted_bootstrap(r.weights, r.weights.size(), seed);
  return r;
}

std::vector<double> r2_linear_losses(std::span<const int> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) throw BoostError("adaboost_r2: label/score length mismatch");
  std::vector<double> losses(labels.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!(scores[i] >= 0.0 && scores[i] <= 1.0)) throw BoostError("adaboost_r2: scores must lie in [0,1]");
    losses[i] = std::abs(static_cast<double>(labels[i]) - scores[i]);
    worst = std::max(worst, losses[i]);
  }
  if (worst > 0.0) {
    for (double& l : losses) l /= worst;
  }
  return losses;
}

R2Round adaboost_r2_round(std::span<const double> weights, std::span<const int> labels,
                          std::span<const double> scores, std::uint64_t seed) {
  return adaboost_r2_update(weights, r2_linear_losses(labels, scores), seed);
}

}  // namespace adagnn::boosting
