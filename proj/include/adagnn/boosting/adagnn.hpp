#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "adagnn/boosting/ensemble.hpp"
#include "adagnn/boosting/task_data.hpp"
#include "adagnn/eval/metrics.hpp"
#include "adagnn/gnn/learner.hpp"

namespace adagnn::boosting {

enum class Algorithm { samme_r, adaboost_r2, concat_nn };

std::string to_string(Algorithm algorithm);
Algorithm parse_algorithm(const std::string& text);

/// Which predictions drive the SAMME.R weight update.
enum class WeightSource { automatic, per_learner, combined };

std::string to_string(WeightSource source);
WeightSource parse_weight_source(const std::string& text);

struct BoostConfig {
  std::size_t max_learners = 5;
  double boost_learning_rate = 1.0;
  Algorithm algorithm = Algorithm::samme_r;
  double tau = 0.5;
  /// automatic: per-learner scores for single-task runs, the combined
  /// ensemble prediction for multitask runs.
  WeightSource weight_source = WeightSource::automatic;
  double weight_cap = 0.5;
  /// Stopping rule (b): drop a round that corrects no earlier mistake.
  bool require_correction = true;
  ConcatTrainOptions concat;

  void validate(bool allow_off_grid = false) const;
  [[nodiscard]] bool uses_combined_source(gnn::Task task) const;
};

struct RoundRecord {
  std::size_t round = 0;
  /// Weighted misclassification of this round's learner under the weights it
  /// was trained with.
  double weighted_error = 0.0;
  /// Training examples misclassified by the previous ensemble that the
  /// ensemble including this learner gets right.
  std::size_t corrected = 0;
  double coefficient = 1.0;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
};

struct BoostState {
  gnn::Task task = gnn::Task::link_prediction;
  BoostConfig config;
  /// Weights for the next round: persistent positives first, then the
  /// current negatives.
  std::vector<double> edge_weights;
  std::vector<double> node_weights;
  std::vector<gnn::WeakLearnerParams> learners;
  std::vector<double> round_errors;
  std::vector<RoundRecord> rounds;
  bool stopped = false;
  StopReason stop_reason = StopReason::none;
  std::optional<ConcatDecoder> concat;
  std::uint64_t seed = 0;
  /// Seed of the deterministic inference neighborhoods.
  std::uint64_t eval_seed = 0;
};

/// Per-learner predictions on the fixed evaluation sets, so the ensemble of
/// any prefix 1..K can be rebuilt without re-running the encoders.
struct ScoreCache {
  std::vector<std::vector<double>> train_eval, validation, test;
  std::vector<Tensor> node_train_eval, node_validation, node_test;
  std::vector<int> train_labels, validation_labels, test_labels;
  /// Ensemble predictions of each prefix (index k-1), produced by the
  /// algorithm's own combiner (convex combination or concat decoder).
  std::vector<std::vector<double>> ensemble_train_eval, ensemble_validation, ensemble_test;
  std::vector<Tensor> node_ensemble_train_eval, node_ensemble_validation, node_ensemble_test;
};

struct BoostResult {
  BoostState state;
  eval::MetricsReport report;
  ScoreCache cache;
};

/// Called once per retained round, after the weight update is committed.
using ProgressFn = std::function<void(const BoostState&, const RoundRecord&, const eval::RoundMetrics&)>;

/// Independent random streams of a run; round r of stream s uses
/// derive_seed(seed, s, r).
enum class SeedStream : std::uint64_t { eval = 1, fit, negatives, bootstrap, concat };
std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream, std::uint64_t round);

/// Boosting loop: fit learners on reweighted examples until a stopping rule fires.
BoostResult train_adagnn(const gnn::GraphContext& context, const TaskData& data, const gnn::EncoderConfig& encoder,
                         const BoostConfig& boost, const gnn::TrainHyper& hyper, std::uint64_t seed,
                         const ProgressFn& progress = {});

/// Convex-combination weights of the first `k` learners: uniform for
/// SAMME.R and concat_nn, normalized log(1/beta) coefficients for R2.
std::vector<double> prefix_alphas(const BoostState& state, std::size_t k);

/// Nodes whose argmax prediction is not one of their labelled classes.
std::vector<bool> node_mistakes(const Tensor& predictions, std::span<const NodeExample> nodes);
double node_error(const Tensor& predictions, std::span<const NodeExample> nodes);

}  // namespace adagnn::boosting
