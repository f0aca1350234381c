#include "adagnn/eval/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "adagnn/eval/metrics.hpp"
#include "adagnn/eval/report_io.hpp"

namespace adagnn::eval {

std::span<const double> EmbeddingTable::of(NodeId node) const {
  const auto it = std::ranges::find(nodes, node);
  if (it == nodes.end()) throw EvalError("embedding table has no row for node " + std::to_string(node));
  return row(static_cast<std::size_t>(it - nodes.begin()));
}

std::vector<EmbeddingTable> export_embeddings(const boosting::BoostState& state, const gnn::GraphContext& context,
                                              std::span<const NodeId> nodes) {
  if (state.learners.empty()) throw EvalError("export_embeddings: the state has no trained learners");
  std::vector<EmbeddingTable> out;
  for (std::size_t k = 0; k < state.learners.size(); ++k) {
    const auto z = gnn::embed_nodes(state.learners[k], context, nodes, state.eval_seed);
    EmbeddingTable t;
    t.learner = k + 1;
    t.nodes.assign(nodes.begin(), nodes.end());
    t.dim = z.cols();
    t.values.assign(z.values().begin(), z.values().end());
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<NodeId> nearest_neighbors(const EmbeddingTable& table, NodeId center, std::span<const NodeId> candidates) {
  const auto c = table.of(center);
  std::vector<std::pair<double, NodeId>> scored;
  scored.reserve(candidates.size());
  for (NodeId v : candidates) {
    if (v == center) continue;
    const auto z = table.of(v);
    scored.emplace_back(std::inner_product(c.begin(), c.end(), z.begin(), 0.0), v);
  }
  std::ranges::sort(scored, [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
  std::vector<NodeId> out;
  out.reserve(scored.size());
  for (const auto& [s, v] : scored) out.push_back(v);
  return out;
}

std::vector<double> rank_positions(std::span<const NodeId> ranking, std::span<const NodeId> candidates) {
  std::unordered_map<NodeId, std::size_t> pos;
  for (std::size_t i = 0; i < ranking.size(); ++i) pos[ranking[i]] = i + 1;
  std::vector<double> out;
  out.reserve(candidates.size());
  for (NodeId v : candidates) {
    const auto it = pos.find(v);
    if (it == pos.end()) throw EvalError("rank_positions: node " + std::to_string(v) + " is not ranked");
    out.push_back(static_cast<double>(it->second));
  }
  return out;
}

namespace {

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) r[order[t]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw EvalError("spearman: length mismatch");
  if (a.size() < 2) throw EvalError("spearman: need at least two observations");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw EvalError("spearman: constant input");
  return sab / std::sqrt(saa * sbb);
}

std::vector<SpaceComparison> compare_spaces(std::span<const EmbeddingTable> tables, NodeId center,
                                            std::span<const NodeId> candidates) {
  std::vector<NodeId> others;
  for (NodeId v : candidates) {
    if (v != center) others.push_back(v);
  }
  std::vector<std::vector<double>> ranks;
  for (const auto& t : tables) ranks.push_back(rank_positions(nearest_neighbors(t, center, others), others));
  std::vector<SpaceComparison> out;
  for (std::size_t a = 0; a < tables.size(); ++a) {
    for (std::size_t b = a + 1; b < tables.size(); ++b) {
      out.push_back({tables[a].learner, tables[b].learner, spearman(ranks[a], ranks[b])});
    }
  }
  return out;
}

void write_embeddings_csv(const EmbeddingTable& table, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw EvalError("cannot write " + path);
  os << "node_id";
  for (std::size_t d = 0; d < table.dim; ++d) os << ",z" << d;
  os << '\n';
  for (std::size_t i = 0; i < table.nodes.size(); ++i) {
    os << table.nodes[i];
    for (double x : table.row(i)) os << ',' << shortest(x);
    os << '\n';
  }
  if (!os) throw EvalError("failed writing " + path);
}

}  // namespace adagnn::eval
