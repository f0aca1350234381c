#pragma once

#include <cstdint>
#include <vector>

#include "adagnn/graphdata/graph.hpp"
#include "json.hpp"

namespace adagnn::graphdata {

struct SyntheticParams {
  std::size_t num_nodes = 1000;
  std::size_t num_modes = 3;
  std::size_t feature_dim_per_mode = 8;
  /// Upper bound on latent modes per node; each node draws a count uniformly
  /// from [1, modes_per_node].
  std::size_t modes_per_node = 2;
  /// Probability that a node pair sharing at least one mode is linked.
  double intra_mode_edge_prob = 0.01;
  /// Each mode edge spawns one uniformly random noise edge with this probability.
  double noise_edge_prob = 0.0;
  /// Standard deviation of the per-node noise on active feature blocks.
  double feature_noise = 0.3;
  /// Standard deviation of inactive feature blocks.
  double inactive_noise = 0.01;
  std::uint64_t seed = 0;
};

inline constexpr int kNoiseMode = -1;

struct SyntheticGraph {
  Graph graph;
  /// Sorted latent modes of each node.
  std::vector<std::vector<std::size_t>> node_modes;
  /// Generating mode per edge (kNoiseMode for noise edges).
  std::vector<int> edge_modes;
  SyntheticParams params;

  [[nodiscard]] nlohmann::json ground_truth_json() const;
};

/// Multi-modal graph: nodes belong to latent modes, features are
/// concatenated per-mode blocks (active blocks = mode centroid + noise,
/// inactive blocks near zero), edges link nodes sharing a mode, and labels
/// are normalized mode-membership vectors.
SyntheticGraph gen_synthetic_multimodal(const SyntheticParams& params);

bool share_mode(const SyntheticGraph& g, NodeId a, NodeId b);

}  // namespace adagnn::graphdata
