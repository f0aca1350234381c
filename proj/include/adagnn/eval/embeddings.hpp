#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "adagnn/boosting/adagnn.hpp"

namespace adagnn::eval {

using graphdata::NodeId;

/// Embeddings of one learner's space, row i belonging to nodes[i].
struct EmbeddingTable {
  std::size_t learner = 0;  // 1-based round index
  std::vector<NodeId> nodes;
  std::size_t dim = 0;
  std::vector<double> values;  // row-major, nodes.size() x dim

  [[nodiscard]] std::span<const double> row(std::size_t i) const { return std::span(values).subspan(i * dim, dim); }
  /// Row of a node id; throws when the node is not in the table.
  [[nodiscard]] std::span<const double> of(NodeId node) const;
};

/// One table per retained learner, computed with the state's inference seed.
std::vector<EmbeddingTable> export_embeddings(const boosting::BoostState& state, const gnn::GraphContext& context,
                                              std::span<const NodeId> nodes);

/// Candidates ordered from most to least similar to `center` under the
/// decoder's similarity (dot product); ties go to the smaller node id.
std::vector<NodeId> nearest_neighbors(const EmbeddingTable& table, NodeId center, std::span<const NodeId> candidates);

/// 1-based rank of each candidate (in the given order) within `ranking`.
std::vector<double> rank_positions(std::span<const NodeId> ranking, std::span<const NodeId> candidates);

/// Spearman rank correlation; tied values share their average rank.
double spearman(std::span<const double> a, std::span<const double> b);

struct SpaceComparison {
  std::size_t learner_a = 0, learner_b = 0;
  double spearman = 0.0;
};

/// Rank correlation of the candidates' nearest-neighbor ranks for every pair
/// of learners.
std::vector<SpaceComparison> compare_spaces(std::span<const EmbeddingTable> tables, NodeId center,
                                            std::span<const NodeId> candidates);

/// "node_id,z0,...,z{d-1}" with round-trip precision.
void write_embeddings_csv(const EmbeddingTable& table, const std::string& path);

}  // namespace adagnn::eval
