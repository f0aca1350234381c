#include "adagnn/graphdata/synthetic.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <random>
#include <unordered_set>

namespace adagnn::graphdata {

namespace {

void validate(const SyntheticParams& p) {
  auto fail = [](const std::string& what) { throw GraphError("synthetic: " + what); };
  if (p.num_nodes < 2) fail("num_nodes must be >= 2");
  if (p.num_modes < 2 || p.num_modes > 64) fail("num_modes must lie in [2, 64]");
  if (p.modes_per_node < 1 || p.modes_per_node > p.num_modes) fail("modes_per_node must lie in [1, num_modes]");
  if (p.feature_dim_per_mode < 1) fail("feature_dim_per_mode must be >= 1");
  if (!(p.intra_mode_edge_prob >= 0.0 && p.intra_mode_edge_prob <= 1.0)) fail("intra_mode_edge_prob must lie in [0,1]");
  if (!(p.noise_edge_prob >= 0.0 && p.noise_edge_prob <= 1.0)) fail("noise_edge_prob must lie in [0,1]");
  if (p.feature_noise < 0.0 || p.inactive_noise < 0.0) fail("noise levels must be non-negative");
}

}  // namespace

SyntheticGraph gen_synthetic_multimodal(const SyntheticParams& params) {
  validate(params);
  std::mt19937_64 rng(params.seed);
  const std::size_t n = params.num_nodes;
  const std::size_t k = params.num_modes;
  const std::size_t d = params.feature_dim_per_mode;

  SyntheticGraph out;
  out.params = params;
  out.node_modes.resize(n);
  std::vector<std::uint64_t> masks(n, 0);
  std::uniform_int_distribution<std::size_t> count_dist(1, params.modes_per_node);
  std::vector<std::size_t> modes(k);
  for (std::size_t v = 0; v < n; ++v) {
    std::iota(modes.begin(), modes.end(), std::size_t{0});
    const std::size_t count = count_dist(rng);
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, k - 1);
      std::swap(modes[i], modes[pick(rng)]);
    }
    out.node_modes[v].assign(modes.begin(), modes.begin() + static_cast<std::ptrdiff_t>(count));
    std::ranges::sort(out.node_modes[v]);
    for (std::size_t m : out.node_modes[v]) masks[v] |= std::uint64_t{1} << m;
  }

  // Features: mode centroids first, then per-node blocks.
  std::normal_distribution<double> standard(0.0, 1.0);
  FeatureMatrix centroids(k, d);
  for (double& x : centroids.data) x = standard(rng);
  FeatureMatrix features(n, k * d);
  std::normal_distribution<double> active_noise(0.0, params.feature_noise);
  std::normal_distribution<double> inactive_noise(0.0, params.inactive_noise);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t m = 0; m < k; ++m) {
      const bool active = (masks[v] >> m) & 1U;
      for (std::size_t j = 0; j < d; ++j) {
        features(v, m * d + j) = active ? centroids(m, j) + active_noise(rng) : inactive_noise(rng);
      }
    }
  }

  std::vector<Edge> edges;
  std::bernoulli_distribution link(params.intra_mode_edge_prob);
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = a + 1; b < n; ++b) {
      const std::uint64_t shared = masks[a] & masks[b];
      if (shared == 0 || !link(rng)) continue;
      // Annotate with one of the shared modes, uniformly.
      const int count = std::popcount(shared);
      std::uniform_int_distribution<int> which(0, count - 1);
      int skip = which(rng);
      int mode = 0;
      for (std::uint64_t bits = shared; bits != 0; bits &= bits - 1) {
        if (skip-- == 0) {
          mode = std::countr_zero(bits);
          break;
        }
      }
      edges.push_back({a, b, std::nullopt});
      out.edge_modes.push_back(mode);
    }
  }

  std::unordered_set<std::uint64_t> present;
  for (const auto& e : edges) present.insert(pair_key(e.src, e.dst));
  const std::size_t mode_edges = edges.size();
  std::bernoulli_distribution spawn(params.noise_edge_prob);
  std::uniform_int_distribution<NodeId> any(0, n - 1);
  const std::size_t max_pairs = n * (n - 1) / 2;
  for (std::size_t i = 0; i < mode_edges; ++i) {
    if (!spawn(rng) || present.size() >= max_pairs) continue;
    while (true) {
      const NodeId a = any(rng);
      const NodeId b = any(rng);
      if (a == b || !present.insert(pair_key(a, b)).second) continue;
      edges.push_back({std::min(a, b), std::max(a, b), std::nullopt});
      out.edge_modes.push_back(kNoiseMode);
      break;
    }
  }

  FeatureMatrix labels(n, k);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t m : out.node_modes[v]) labels(v, m) = 1.0;
  }
  out.graph = Graph(n, std::move(edges)).with_node_features(std::move(features)).with_node_labels(std::move(labels));
  return out;
}

bool share_mode(const SyntheticGraph& g, NodeId a, NodeId b) {
  const auto& ma = g.node_modes.at(a);
  const auto& mb = g.node_modes.at(b);
  return std::ranges::any_of(ma, [&](std::size_t m) { return std::ranges::find(mb, m) != mb.end(); });
}

nlohmann::json SyntheticGraph::ground_truth_json() const {
  nlohmann::json j;
  j["num_nodes"] = graph.num_nodes();
  j["num_modes"] = params.num_modes;
  j["seed"] = params.seed;
  j["node_modes"] = node_modes;
  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t i = 0; i < graph.num_edges(); ++i) {
    const auto& e = graph.edges()[i];
    edges.push_back({{"src", e.src}, {"dst", e.dst}, {"mode", edge_modes[i]}});
  }
  j["edges"] = std::move(edges);
  return j;
}

}  // namespace adagnn::graphdata
