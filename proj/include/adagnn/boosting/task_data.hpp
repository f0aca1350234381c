#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adagnn/gnn/learner.hpp"
#include "adagnn/graphdata/split.hpp"

namespace adagnn::boosting {

using graphdata::EdgeExample;
using graphdata::NodeExample;

/// Fixed example sets for one experiment. Evaluation sets carry their
/// positives plus an equal number of seeded negatives that never change, so
/// every round and every compared model is scored on the same pairs.
struct TaskData {
  gnn::Task task = gnn::Task::link_prediction;
  /// Observed training edges; boosting weights persist over these.
  std::vector<EdgeExample> train_positives;
  /// Training nodes with their label distributions.
  std::vector<NodeExample> train_nodes;
  gnn::ExampleSet train_eval;
  gnn::ExampleSet validation;
  gnn::ExampleSet test;
  /// Edges available for message passing (training positives for link tasks,
  /// every observed edge for node-only tasks).
  std::vector<EdgeExample> message_edges;
  std::string split_signature;
  std::uint64_t eval_negative_seed = 0;
};

/// Splits edges (and, for node tasks, nodes with the same fractions and seed)
/// and draws the fixed evaluation negatives from `eval_negative_seed`.
TaskData prepare_task_data(const graphdata::Graph& graph, gnn::Task task, const graphdata::SplitSpec& split,
                           std::uint64_t eval_negative_seed);

}  // namespace adagnn::boosting
