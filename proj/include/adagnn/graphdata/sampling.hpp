#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "adagnn/graphdata/graph.hpp"
#include "adagnn/graphdata/split.hpp"

namespace adagnn::graphdata {

/// Mirrored CSR adjacency over a subset of edges (the message-passing graph).
class Adjacency {
 public:
  Adjacency() = default;

  /// All edges of the graph.
  static Adjacency from_graph(const Graph& graph);
  /// Only the given observed examples (e.g. the training positives).
  static Adjacency from_examples(std::size_t num_nodes, std::span<const EdgeExample> examples);

  [[nodiscard]] std::size_t num_nodes() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  [[nodiscard]] std::span<const NodeId> neighbors(NodeId v) const;
  [[nodiscard]] std::span<const double> times(NodeId v) const;
  [[nodiscard]] std::size_t degree(NodeId v) const { return neighbors(v).size(); }
  [[nodiscard]] bool timed() const { return timed_; }

 private:
  static Adjacency build(std::size_t num_nodes, const std::vector<std::pair<Edge, bool>>& edges);

  std::vector<std::size_t> offsets_;
  std::vector<NodeId> targets_;
  std::vector<double> times_;
  bool timed_ = false;
};

struct NeighborhoodSample {
  NodeId center = 0;
  std::vector<NodeId> neighbor_ids;
  bool include_self = true;
  /// No eligible neighbor existed.
  bool isolated = false;
};

struct NeighborSampleOptions {
  std::size_t sample_size = 10;
  /// Only neighbors reached through edges strictly older than this time.
  std::optional<double> time_cutoff;
  /// Neighbor to leave out (the other endpoint of the query pair).
  std::optional<NodeId> exclude;
  /// Fill up to sample_size by drawing with replacement when degree is short.
  bool pad = false;
  bool include_self = true;
};

/// Draws up to sample_size neighbors of `center`: without replacement when
/// enough candidates exist, otherwise all of them (padded with replacement
/// when `pad` is set).
NeighborhoodSample sample_neighbors(const Adjacency& adjacency, NodeId center,
                                    const NeighborSampleOptions& options, std::mt19937_64& rng);

/// Convenience overload over the whole graph with a fresh seeded generator.
NeighborhoodSample sample_neighbors(const Graph& graph, NodeId center, std::size_t sample_size,
                                    std::optional<double> time_cutoff, std::uint64_t seed);

struct NegativeSampleOptions {
  /// Maximum draws per requested negative before giving up.
  std::size_t attempts_per_sample = 200;
};

/// Returns exactly positives.size() label-0 pairs that are not observed edges
/// (and not self loops). Each negative inherits the query time of the
/// positive at the same index.
std::vector<EdgeExample> sample_negatives(const Graph& graph, std::span<const EdgeExample> positives,
                                          std::uint64_t seed, NegativeSampleOptions options = {});

}  // namespace adagnn::graphdata
