#include "adagnn/graphdata/graph.hpp"

#include <algorithm>
#include <cmath>

namespace adagnn::graphdata {

std::uint64_t pair_key(NodeId a, NodeId b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (hi << 32) | lo;
}

Graph::Graph(std::size_t num_nodes, std::vector<Edge> edges, std::vector<std::string> node_names)
    : num_nodes_(num_nodes), edges_(std::move(edges)), node_names_(std::move(node_names)) {
  if (!node_names_.empty() && node_names_.size() != num_nodes_) {
    throw GraphError("graph: " + std::to_string(node_names_.size()) + " node names for " +
                     std::to_string(num_nodes_) + " nodes");
  }
  std::size_t stamped = 0;
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge& e = edges_[i];
    if (e.src >= num_nodes_ || e.dst >= num_nodes_) {
      throw GraphError("graph: edge " + std::to_string(i) + " endpoint out of range [0," +
                       std::to_string(num_nodes_) + ")");
    }
    if (e.timestamp) {
      if (*e.timestamp < 0 || !std::isfinite(*e.timestamp)) {
        throw GraphError("graph: edge " + std::to_string(i) + " has a negative or non-finite timestamp");
      }
      ++stamped;
    }
    pair_index_.try_emplace(pair_key(e.src, e.dst), i);
  }
  if (stamped != 0 && stamped != edges_.size()) {
    throw GraphError("graph: timestamps must be present on all edges or none");
  }
  has_timestamps_ = stamped != 0;
  for (std::size_t i = 0; i < node_names_.size(); ++i) {
    if (!name_index_.emplace(node_names_[i], i).second) {
      throw GraphError("graph: duplicate node name '" + node_names_[i] + "'");
    }
  }
}

std::string Graph::node_name(NodeId id) const {
  if (node_names_.empty()) return std::to_string(id);
  return node_names_.at(id);
}

std::optional<NodeId> Graph::find_node(const std::string& name) const {
  if (node_names_.empty()) {
    try {
      std::size_t pos = 0;
      const auto v = std::stoull(name, &pos);
      if (pos == name.size() && v < num_nodes_) return static_cast<NodeId>(v);
    } catch (const std::exception&) {
    }
    return std::nullopt;
  }
  const auto it = name_index_.find(name);
  if (it == name_index_.end()) return std::nullopt;
  return it->second;
}

Graph Graph::with_node_features(FeatureMatrix features) const {
  if (features.rows != num_nodes_) {
    throw GraphError("graph: feature matrix has " + std::to_string(features.rows) + " rows but graph has " +
                     std::to_string(num_nodes_) + " nodes");
  }
  Graph g = *this;
  g.node_features_ = std::move(features);
  return g;
}

Graph Graph::with_edge_features(FeatureMatrix features) const {
  if (features.rows != edges_.size()) {
    throw GraphError("graph: edge feature matrix has " + std::to_string(features.rows) + " rows but graph has " +
                     std::to_string(edges_.size()) + " edges");
  }
  Graph g = *this;
  g.edge_features_ = std::move(features);
  return g;
}

Graph Graph::with_node_labels(FeatureMatrix labels) const {
  if (labels.rows != num_nodes_) {
    throw GraphError("graph: label matrix has " + std::to_string(labels.rows) + " rows but graph has " +
                     std::to_string(num_nodes_) + " nodes");
  }
  for (std::size_t r = 0; r < labels.rows; ++r) {
    double sum = 0.0;
    for (double v : labels.row(r)) {
      if (v < 0) throw GraphError("graph: negative label entry in row " + std::to_string(r));
      sum += v;
    }
    if (sum <= 0) throw GraphError("graph: label row " + std::to_string(r) + " sums to zero");
    for (double& v : labels.row(r)) v /= sum;
  }
  Graph g = *this;
  g.node_labels_ = std::move(labels);
  return g;
}

bool Graph::has_edge(NodeId a, NodeId b) const { return pair_index_.contains(pair_key(a, b)); }

}  // namespace adagnn::graphdata
