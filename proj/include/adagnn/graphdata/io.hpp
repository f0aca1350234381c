#pragma once

#include <filesystem>

#include "adagnn/graphdata/graph.hpp"

namespace adagnn::graphdata {

/// Reads "src,dst[,timestamp]" rows. Node identifiers are arbitrary strings,
/// compacted to [0, n) in order of first appearance. A header row is skipped
/// when its fields are not data (e.g. "src,dst,ts").
/// `known_nodes` pre-registers identifiers (in order) so that isolated nodes
/// and an external id order survive the load.
Graph load_edge_csv(const std::filesystem::path& path, bool has_timestamps,
                    const std::vector<std::string>& known_nodes = {});

/// Node identifiers of a feature/label file, in file order.
std::vector<std::string> read_node_ids(const std::filesystem::path& path);

/// Attaches node features from a CSV "node_id,f0,f1,..." or a JSON object
/// mapping node_id to an array. Every node needs exactly one row; all-zero
/// rows are rejected unless allow_zero is set.
Graph load_node_features(const std::filesystem::path& path, const Graph& graph, bool allow_zero = false);

/// Attaches node labels from the same CSV/JSON layout as features.
Graph load_node_labels(const std::filesystem::path& path, const Graph& graph);

void write_edge_csv(const std::filesystem::path& path, const Graph& graph);
void write_matrix_csv(const std::filesystem::path& path, const Graph& graph, const FeatureMatrix& matrix,
                      const std::string& column_prefix);

}  // namespace adagnn::graphdata
