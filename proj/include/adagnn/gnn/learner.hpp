#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "adagnn/gnn/decoder.hpp"
#include "adagnn/gnn/encoder.hpp"
#include "adagnn/graphdata/graph.hpp"
#include "adagnn/graphdata/sampling.hpp"
#include "adagnn/graphdata/split.hpp"

namespace adagnn::gnn {

using graphdata::EdgeExample;
using graphdata::NodeExample;

enum class Task { link_prediction, node_recommendation, multitask };

std::string to_string(Task task);
Task parse_task(const std::string& text);
inline bool has_link_part(Task t) { return t != Task::node_recommendation; }
inline bool has_node_part(Task t) { return t != Task::link_prediction; }

struct WeakLearnerParams {
  EncoderConfig config;
  EncoderParams encoder;
  /// Present for tasks with a node part.
  std::optional<MlpDecoder> node_decoder;
  double alpha = 1.0;

  [[nodiscard]] std::vector<std::pair<std::string, Tensor>> named() const;
  [[nodiscard]] WeakLearnerParams clone() const;
  /// Throws when alpha is negative or any weight is non-finite.
  void validate() const;
};

struct TrainHyper {
  double learning_rate = 1e-3;
  std::size_t epochs = 50;
  std::size_t patience = 5;
  std::size_t batch_size = 200;
  double multitask_mix = 0.5;
  /// Hidden width of the node decoder; 0 means embed_dim.
  std::size_t node_hidden_dim = 0;

  void validate(bool allow_off_grid = false) const;
};

/// Everything a learner needs to see of the graph: constant features and the
/// message-passing adjacency (built from training positives only, so held-out
/// edges never leak into neighborhoods).
struct GraphContext {
  const graphdata::Graph* graph = nullptr;
  Tensor features;
  graphdata::Adjacency adjacency;
  std::size_t num_labels = 0;

  static GraphContext build(const graphdata::Graph& graph, std::span<const EdgeExample> message_edges);
};

struct ExampleSet {
  std::vector<EdgeExample> edges;
  std::vector<NodeExample> nodes;
  [[nodiscard]] bool empty() const { return edges.empty() && nodes.empty(); }
};

struct FitDiagnostics {
  std::vector<double> train_loss;      // weighted mean loss per epoch
  std::vector<double> validation_ap;   // one per epoch when validation data exists
  std::size_t best_epoch = 0;          // 1-based; 0 when no epoch ran
  bool stopped_early = false;
};

struct FitResult {
  WeakLearnerParams params;
  FitDiagnostics diagnostics;
};

/// Trains one weak learner with Adam on mini-batches against the weighted loss.
/// Example weights are rescaled to mean 1 over the training set so the loss
/// scale does not depend on the set size. With validation data the parameters
/// of the best validation epoch are returned (early stopping with `patience`).
FitResult fit_weak_learner(const GraphContext& context, Task task, const ExampleSet& train,
                           const ExampleSet& validation, const EncoderConfig& config, const TrainHyper& hyper,
                           std::uint64_t seed);

/// Deterministic neighborhood for inference: the sample depends only on
/// (seed, center, excluded partner), never on batch composition.
graphdata::NeighborhoodSample inference_neighborhood(const GraphContext& context, const EncoderConfig& config,
                                                     graphdata::NodeId center,
                                                     std::optional<graphdata::NodeId> exclude,
                                                     std::optional<double> time_cutoff, bool include_self,
                                                     std::uint64_t seed);

/// s(i,j) for each example. A pair's own edge is excluded from both
/// neighborhoods, exactly as during training.
std::vector<double> score_pairs(const WeakLearnerParams& learner, const GraphContext& context,
                                std::span<const EdgeExample> pairs, std::uint64_t seed);

/// Recommendation distributions, (n, d_Y), computed without self features
/// unless the config says otherwise.
Tensor predict_nodes(const WeakLearnerParams& learner, const GraphContext& context,
                     std::span<const graphdata::NodeId> nodes, std::uint64_t seed);

/// Embeddings z (n, d_Z) with self features included.
Tensor embed_nodes(const WeakLearnerParams& learner, const GraphContext& context,
                   std::span<const graphdata::NodeId> nodes, std::uint64_t seed);

/// Average precision over all (node, class) entries, positives being entries
/// with label > 0.
double node_average_precision(const Tensor& predictions, std::span<const NodeExample> nodes);

}  // namespace adagnn::gnn
