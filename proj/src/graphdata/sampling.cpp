#include "adagnn/graphdata/sampling.hpp"

#include <algorithm>
#include <numeric>

namespace adagnn::graphdata {

Adjacency Adjacency::build(std::size_t num_nodes, const std::vector<std::pair<Edge, bool>>& edges) {
  Adjacency adj;
  adj.offsets_.assign(num_nodes + 1, 0);
  for (const auto& [e, _] : edges) {
    ++adj.offsets_[e.src + 1];
    if (e.src != e.dst) ++adj.offsets_[e.dst + 1];
  }
  std::partial_sum(adj.offsets_.begin(), adj.offsets_.end(), adj.offsets_.begin());
  adj.targets_.resize(adj.offsets_.back());
  adj.times_.resize(adj.offsets_.back(), 0.0);
  std::vector<std::size_t> cursor(adj.offsets_.begin(), adj.offsets_.end() - 1);
  adj.timed_ = !edges.empty() && edges.front().second;
  for (const auto& [e, timed] : edges) {
    const double t = timed ? *e.timestamp : 0.0;
    adj.targets_[cursor[e.src]] = e.dst;
    adj.times_[cursor[e.src]++] = t;
    if (e.src != e.dst) {
      adj.targets_[cursor[e.dst]] = e.src;
      adj.times_[cursor[e.dst]++] = t;
    }
  }
  return adj;
}

Adjacency Adjacency::from_graph(const Graph& graph) {
  std::vector<std::pair<Edge, bool>> edges;
  edges.reserve(graph.num_edges());
  for (const auto& e : graph.edges()) edges.emplace_back(e, graph.has_timestamps());
  return build(graph.num_nodes(), edges);
}

Adjacency Adjacency::from_examples(std::size_t num_nodes, std::span<const EdgeExample> examples) {
  std::vector<std::pair<Edge, bool>> edges;
  for (const auto& ex : examples) {
    if (ex.label != 1) continue;
    if (ex.src >= num_nodes || ex.dst >= num_nodes) throw GraphError("adjacency: example endpoint out of range");
    edges.emplace_back(Edge{ex.src, ex.dst, ex.time}, ex.time.has_value());
  }
  return build(num_nodes, edges);
}

std::span<const NodeId> Adjacency::neighbors(NodeId v) const {
  if (v + 1 >= offsets_.size()) throw GraphError("adjacency: node " + std::to_string(v) + " out of range");
  return {targets_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
}

std::span<const double> Adjacency::times(NodeId v) const {
  if (v + 1 >= offsets_.size()) throw GraphError("adjacency: node " + std::to_string(v) + " out of range");
  return {times_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
}

NeighborhoodSample sample_neighbors(const Adjacency& adjacency, NodeId center,
                                    const NeighborSampleOptions& options, std::mt19937_64& rng) {
  NeighborhoodSample sample;
  sample.center = center;
  sample.include_self = options.include_self;

  const auto nbrs = adjacency.neighbors(center);
  const auto times = adjacency.times(center);
  std::vector<NodeId> candidates;
  candidates.reserve(nbrs.size());
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    if (options.exclude && nbrs[i] == *options.exclude) continue;
    if (options.time_cutoff && adjacency.timed() && !(times[i] < *options.time_cutoff)) continue;
    candidates.push_back(nbrs[i]);
  }
  if (candidates.empty() || options.sample_size == 0) {
    sample.isolated = candidates.empty();
    return sample;
  }
  const std::size_t k = options.sample_size;
  if (candidates.size() >= k) {
    // Partial Fisher-Yates: the first k slots become a uniform k-subset.
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
      std::swap(candidates[i], candidates[pick(rng)]);
    }
    candidates.resize(k);
    sample.neighbor_ids = std::move(candidates);
    return sample;
  }
  sample.neighbor_ids = candidates;
  if (options.pad) {
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    while (sample.neighbor_ids.size() < k) sample.neighbor_ids.push_back(candidates[pick(rng)]);
  }
  return sample;
}

NeighborhoodSample sample_neighbors(const Graph& graph, NodeId center, std::size_t sample_size,
                                    std::optional<double> time_cutoff, std::uint64_t seed) {
  const Adjacency adj = Adjacency::from_graph(graph);
  std::mt19937_64 rng(seed);
  NeighborSampleOptions options;
  options.sample_size = sample_size;
  options.time_cutoff = time_cutoff;
  return sample_neighbors(adj, center, options, rng);
}

std::vector<EdgeExample> sample_negatives(const Graph& graph, std::span<const EdgeExample> positives,
                                          std::uint64_t seed, NegativeSampleOptions options) {
  const std::size_t n = graph.num_nodes();
  if (n < 2) throw GraphError("negative sampling: graph needs at least 2 nodes");
  std::vector<EdgeExample> out;
  out.reserve(positives.size());
  if (positives.empty()) return out;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<NodeId> pick(0, n - 1);
  const std::size_t budget = options.attempts_per_sample * positives.size();
  std::size_t attempts = 0;
  for (const auto& pos : positives) {
    while (true) {
      if (attempts++ >= budget) {
        throw GraphError("negative sampling: found " + std::to_string(out.size()) + " of " +
                         std::to_string(positives.size()) + " non-edges within a budget of " +
                         std::to_string(budget) + " draws; graph too dense");
      }
      const NodeId a = pick(rng);
      const NodeId b = pick(rng);
      if (a == b || graph.has_edge(a, b)) continue;
      EdgeExample neg;
      neg.src = a;
      neg.dst = b;
      neg.label = 0;
      neg.origin = ExampleOrigin::negative_sample;
      neg.time = pos.time;
      out.push_back(neg);
      break;
    }
  }
  return out;
}

}  // namespace adagnn::graphdata
