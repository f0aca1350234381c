#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace adagnn::graphdata {

using NodeId = std::size_t;

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major matrix of constants (features, labels).
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  [[nodiscard]] bool empty() const { return rows == 0 || cols == 0; }
  [[nodiscard]] std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  [[nodiscard]] std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  std::optional<double> timestamp;
};

/// Immutable graph: nodes, undirected edges stored once, node features,
/// optional edge features, optional timestamps and optional node labels.
class Graph {
 public:
  Graph() = default;
  Graph(std::size_t num_nodes, std::vector<Edge> edges, std::vector<std::string> node_names = {});

  [[nodiscard]] std::size_t num_nodes() const { return num_nodes_; }
  [[nodiscard]] std::size_t num_edges() const { return edges_.size(); }
  [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
  [[nodiscard]] bool has_timestamps() const { return has_timestamps_; }

  /// Original identifier of a node (the compacted index if none was given).
  [[nodiscard]] std::string node_name(NodeId id) const;
  [[nodiscard]] std::optional<NodeId> find_node(const std::string& name) const;
  [[nodiscard]] const std::vector<std::string>& node_names() const { return node_names_; }

  [[nodiscard]] const FeatureMatrix& node_features() const { return node_features_; }
  [[nodiscard]] std::size_t feature_dim() const { return node_features_.cols; }
  [[nodiscard]] const std::optional<FeatureMatrix>& edge_features() const { return edge_features_; }
  [[nodiscard]] const std::optional<FeatureMatrix>& node_labels() const { return node_labels_; }

  [[nodiscard]] Graph with_node_features(FeatureMatrix features) const;
  [[nodiscard]] Graph with_edge_features(FeatureMatrix features) const;
  /// Rows must be non-negative with a positive sum; stored normalized to sum 1.
  [[nodiscard]] Graph with_node_labels(FeatureMatrix labels) const;

  /// True when (a,b) or (b,a) is an observed edge.
  [[nodiscard]] bool has_edge(NodeId a, NodeId b) const;

 private:
  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::string> node_names_;
  std::unordered_map<std::string, NodeId> name_index_;
  std::unordered_map<std::uint64_t, std::size_t> pair_index_;
  bool has_timestamps_ = false;
  FeatureMatrix node_features_;
  std::optional<FeatureMatrix> edge_features_;
  std::optional<FeatureMatrix> node_labels_;
};

/// Key for an unordered node pair.
std::uint64_t pair_key(NodeId a, NodeId b);

}  // namespace adagnn::graphdata
