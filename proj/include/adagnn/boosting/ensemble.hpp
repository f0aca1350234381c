#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adagnn/gnn/learner.hpp"

namespace adagnn::boosting {

using gnn::Tensor;

/// Convex combination sum_k alpha_k s^k of per-learner score vectors.
/// Alphas must be non-negative and sum to 1 (within 1e-9).
std::vector<double> combine_scores(std::span<const std::vector<double>> per_learner, std::span<const double> alphas);

/// Convex combination of per-learner (n, C) distribution tensors.
Tensor combine_distributions(std::span<const Tensor> per_learner, std::span<const double> alphas);

/// Learner coefficients (WeakLearnerParams::alpha) normalized to sum 1.
std::vector<double> normalized_alphas(std::span<const gnn::WeakLearnerParams> learners);

/// Ensemble similarity of one pair using each learner's alpha (normalized).
double combine_pairwise(std::span<const gnn::WeakLearnerParams> learners, const gnn::GraphContext& context,
                        const graphdata::EdgeExample& pair, std::uint64_t seed);

/// Ensemble recommendation distribution of one node.
std::vector<double> combine_node(std::span<const gnn::WeakLearnerParams> learners, const gnn::GraphContext& context,
                                 graphdata::NodeId node, std::uint64_t seed);

enum class StopReason { none, perfect_fit, no_correction, budget, weak_learning };

std::string to_string(StopReason reason);
StopReason parse_stop_reason(const std::string& text);

struct StopDecision {
  bool stop = false;
  StopReason reason = StopReason::none;
  /// The round that triggered the stop did not earn its place (rules b, d).
  bool drop_last = false;
};

/// `learners` counts the learners including the one just fitted. The wrong
/// flags mark training examples misclassified by the previous ensemble and by
/// the ensemble including the new learner; `previous_wrong` is empty in round 1.
StopDecision should_stop(std::size_t learners, std::size_t max_learners, const std::vector<bool>& previous_wrong,
                         const std::vector<bool>& current_wrong, bool require_correction = true);

/// Uniform decoder over concatenated embeddings of frozen encoders.
struct ConcatDecoder {
  std::size_t num_learners = 0;
  /// Input K*d_Z elementwise products, one sigmoid output.
  std::optional<gnn::MlpDecoder> pair;
  /// Input K*d_Z concatenated embedding, softmax over d_Y.
  std::optional<gnn::MlpDecoder> node;
};

/// Per-learner endpoint embeddings of pairs, concatenated: returns the (n, sum d_Z)
/// matrices for the sources and the destinations.
std::pair<Tensor, Tensor> concat_pair_embeddings(std::span<const gnn::WeakLearnerParams> learners,
                                                 const gnn::GraphContext& context,
                                                 std::span<const graphdata::EdgeExample> pairs, std::uint64_t seed);

/// Concatenated node embeddings for the node task (self excluded unless the
/// encoder config includes it).
Tensor concat_node_embeddings(std::span<const gnn::WeakLearnerParams> learners, const gnn::GraphContext& context,
                              std::span<const graphdata::NodeId> nodes, std::uint64_t seed);

/// Scores from precomputed concatenated embeddings.
std::vector<double> concat_pair_scores(const gnn::MlpDecoder& decoder, const Tensor& zi, const Tensor& zj);
Tensor concat_node_scores(const gnn::MlpDecoder& decoder, const Tensor& z);

/// concat_nn prediction for pairs (s per pair) and nodes (distribution rows).
std::vector<double> concat_nn_predict(std::span<const gnn::WeakLearnerParams> learners, const ConcatDecoder& decoder,
                                      const gnn::GraphContext& context,
                                      std::span<const graphdata::EdgeExample> pairs, std::uint64_t seed);
Tensor concat_nn_predict_nodes(std::span<const gnn::WeakLearnerParams> learners, const ConcatDecoder& decoder,
                               const gnn::GraphContext& context, std::span<const graphdata::NodeId> nodes,
                               std::uint64_t seed);

struct ConcatTrainOptions {
  std::size_t hidden_dim = 64;
  double learning_rate = 1e-3;
  std::size_t epochs = 50;
  std::size_t patience = 5;
  std::size_t batch_size = 200;
};

/// Cached concatenated inputs for one example set.
struct ConcatInputs {
  Tensor zi, zj;        // pairs
  std::vector<int> labels;
  Tensor zn;            // nodes
  std::vector<std::vector<double>> node_labels;
};

ConcatInputs concat_inputs(std::span<const gnn::WeakLearnerParams> learners, const gnn::GraphContext& context,
                           const gnn::ExampleSet& examples, std::uint64_t seed);

/// Trains the uniform decoder(s) on frozen embeddings with uniform example
/// weights, early stopping on validation AP.
ConcatDecoder fit_concat_decoder(std::size_t num_learners, const ConcatInputs& train, const ConcatInputs& validation,
                                 const ConcatTrainOptions& options, std::uint64_t seed);

}  // namespace adagnn::boosting
