#include "adagnn/boosting/task_data.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "adagnn/boosting/weights.hpp"
#include "adagnn/graphdata/sampling.hpp"

namespace adagnn::boosting {

namespace {

std::vector<EdgeExample> with_negatives(const graphdata::Graph& graph, const std::vector<EdgeExample>& positives,
                                        std::uint64_t seed) {
  std::vector<EdgeExample> out = positives;
  if (positives.empty()) return out;
  const auto negatives = graphdata::sample_negatives(graph, positives, seed);
  out.insert(out.end(), negatives.begin(), negatives.end());
  return out;
}

NodeExample node_example(const graphdata::Graph& graph, graphdata::NodeId v) {
  const auto row = graph.node_labels()->row(v);
  return {v, {row.begin(), row.end()}, 1.0};
}

}  // namespace

TaskData prepare_task_data(const graphdata::Graph& graph, gnn::Task task, const graphdata::SplitSpec& split,
                           std::uint64_t eval_negative_seed) {
  TaskData data;
  data.task = task;
  data.eval_negative_seed = eval_negative_seed;
  std::ostringstream sig;
  sig << to_string(split.mode) << ":f=" << split.train_fraction << ":seed=" << split.seed
      << ":n=" << graph.num_nodes() << ":m=" << graph.num_edges() << ":neg=" << eval_negative_seed << ":task="
      << gnn::to_string(task);
  data.split_signature = sig.str();

  graphdata::EdgeSplit edges;
  if (gnn::has_link_part(task)) {
    edges = graphdata::make_split(graph, split);
    if (edges.train.empty()) throw BoostError("prepare_task_data: split left no training edges");
    data.train_positives = edges.train;
    data.message_edges = edges.train;
    // Distinct seeds per set keep the three negative pools independent.
    data.train_eval.edges = with_negatives(graph, edges.train, eval_negative_seed);
    data.validation.edges = with_negatives(graph, edges.validation, eval_negative_seed + 1);
    data.test.edges = with_negatives(graph, edges.test, eval_negative_seed + 2);
  } else {
    for (const auto& e : graph.edges()) {
      EdgeExample ex;
      ex.src = e.src;
      ex.dst = e.dst;
      ex.time = e.timestamp;
      data.message_edges.push_back(ex);
    }
  }

  if (gnn::has_node_part(task)) {
    if (!graph.node_labels()) throw BoostError("prepare_task_data: node task needs node labels");
    const std::size_t n = graph.num_nodes();
    std::vector<graphdata::NodeId> order;
    std::vector<graphdata::NodeId> held;
    if (split.mode == graphdata::SplitMode::inductive && gnn::has_link_part(task)) {
      std::vector<bool> is_held(n, false);
      for (auto v : edges.held_out_nodes) is_held[v] = true;
      for (graphdata::NodeId v = 0; v < n; ++v) (is_held[v] ? held : order).push_back(v);
      for (auto v : order) data.train_nodes.push_back(node_example(graph, v));
      for (std::size_t i = 0; i < held.size(); ++i) {
        (i % 2 == 0 ? data.validation : data.test).nodes.push_back(node_example(graph, held[i]));
      }
    } else {
      order.resize(n);
      std::iota(order.begin(), order.end(), graphdata::NodeId{0});
      std::mt19937_64 rng(split.seed ^ 0x6e6f6465ULL);
      std::ranges::shuffle(order, rng);
      const auto n_train = static_cast<std::size_t>(std::llround(split.train_fraction * static_cast<double>(n)));
      const std::size_t n_val = (n - n_train) / 2;
      for (std::size_t i = 0; i < n; ++i) {
        const NodeExample ex = node_example(graph, order[i]);
        if (i < n_train) {
          data.train_nodes.push_back(ex);
        } else if (i < n_train + n_val) {
          data.validation.nodes.push_back(ex);
        } else {
          data.test.nodes.push_back(ex);
        }
      }
    }
    if (data.train_nodes.empty()) throw BoostError("prepare_task_data: split left no training nodes");
    data.train_eval.nodes = data.train_nodes;
  }
  return data;
}

}  // namespace adagnn::boosting
