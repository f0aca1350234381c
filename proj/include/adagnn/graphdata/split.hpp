#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adagnn/graphdata/graph.hpp"

namespace adagnn::graphdata {

enum class ExampleOrigin { observed, negative_sample };

/// One labelled node pair. Observed examples carry label 1, negative samples
/// label 0; `time` is the query time for chronological tasks.
struct EdgeExample {
  NodeId src = 0;
  NodeId dst = 0;
  int label = 1;
  double weight = 1.0;
  ExampleOrigin origin = ExampleOrigin::observed;
  std::optional<double> time;
};

/// One node with a label distribution (entries >= 0, summing to 1).
struct NodeExample {
  NodeId node = 0;
  std::vector<double> label;
  double weight = 1.0;
};

enum class SplitMode { random_transductive, inductive, chronological };

std::string to_string(SplitMode mode);
SplitMode parse_split_mode(const std::string& text);

struct SplitSpec {
  SplitMode mode = SplitMode::random_transductive;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  /// Drop validation/test positives whose node pair already appeared earlier
  /// (in training or earlier in the same set).
  bool deduplicate_eval = false;
};

struct EdgeSplit {
  std::vector<EdgeExample> train;
  std::vector<EdgeExample> validation;
  std::vector<EdgeExample> test;
  /// Nodes never touched by a training example (inductive mode only).
  std::vector<NodeId> held_out_nodes;
};

/// Partitions the observed edges into train/validation/test positives.
/// Validation and test sizes differ by at most one.
EdgeSplit make_split(const Graph& graph, const SplitSpec& spec);

/// Fraction of examples with at least one endpoint in `unseen`.
double unseen_fraction(const std::vector<EdgeExample>& examples, const std::vector<NodeId>& unseen);

}  // namespace adagnn::graphdata
