#include "adagnn/graphdata/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>

namespace adagnn::graphdata {

std::string to_string(SplitMode mode) {
  switch (mode) {
    case SplitMode::random_transductive: return "random_transductive";
    case SplitMode::inductive: return "inductive";
    case SplitMode::chronological: return "chronological";
  }
  return "unknown";
}

SplitMode parse_split_mode(const std::string& text) {
  if (text == "random_transductive" || text == "transductive") return SplitMode::random_transductive;
  if (text == "inductive") return SplitMode::inductive;
  if (text == "chronological") return SplitMode::chronological;
  throw GraphError("unknown split mode '" + text + "'");
}

namespace {

EdgeExample positive(const Edge& e) {
  EdgeExample ex;
  ex.src = e.src;
  ex.dst = e.dst;
  ex.label = 1;
  ex.origin = ExampleOrigin::observed;
  ex.time = e.timestamp;
  return ex;
}

// Cuts an ordered edge list into train / validation / test with equal
// validation and test sizes (test takes the odd one).
void cut(const std::vector<EdgeExample>& ordered, double train_fraction, EdgeSplit& out) {
  const std::size_t n = ordered.size();
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  const std::size_t rest = n - std::min(n_train, n);
  const std::size_t n_val = rest / 2;
  out.train.assign(ordered.begin(), ordered.begin() + static_cast<std::ptrdiff_t>(n - rest));
  out.validation.assign(ordered.begin() + static_cast<std::ptrdiff_t>(n - rest),
                        ordered.begin() + static_cast<std::ptrdiff_t>(n - rest + n_val));
  out.test.assign(ordered.begin() + static_cast<std::ptrdiff_t>(n - rest + n_val), ordered.end());
}

void deduplicate(EdgeSplit& split) {
  std::unordered_set<std::uint64_t> seen;
  for (const auto& e : split.train) seen.insert(pair_key(e.src, e.dst));
  auto filter = [&](std::vector<EdgeExample>& set) {
    std::vector<EdgeExample> kept;
    for (const auto& e : set) {
      if (seen.insert(pair_key(e.src, e.dst)).second) kept.push_back(e);
    }
    set = std::move(kept);
  };
  filter(split.validation);
  filter(split.test);
}

}  // namespace

EdgeSplit make_split(const Graph& graph, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw GraphError("split: train_fraction must lie in (0,1), got " + std::to_string(spec.train_fraction));
  }
  if (graph.num_edges() == 0) throw GraphError("split: graph has no edges");

  std::vector<EdgeExample> all;
  all.reserve(graph.num_edges());
  for (const auto& e : graph.edges()) all.push_back(positive(e));
  std::mt19937_64 rng(spec.seed);
  EdgeSplit split;

  switch (spec.mode) {
    case SplitMode::random_transductive: {
      std::shuffle(all.begin(), all.end(), rng);
      cut(all, spec.train_fraction, split);
      break;
    }
    case SplitMode::chronological: {
      if (!graph.has_timestamps()) throw GraphError("split: chronological mode needs timestamps");
      std::stable_sort(all.begin(), all.end(),
                       [](const EdgeExample& a, const EdgeExample& b) { return *a.time < *b.time; });
      cut(all, spec.train_fraction, split);
      // Timestamps tied across a boundary move to the later partition.
      auto settle = [](std::vector<EdgeExample>& early, std::vector<EdgeExample>& late) {
        if (early.empty() || late.empty()) return;
        const double boundary = *late.front().time;
        std::vector<EdgeExample> moved;
        while (!early.empty() && *early.back().time >= boundary) {
          moved.push_back(early.back());
          early.pop_back();
        }
        std::reverse(moved.begin(), moved.end());
        late.insert(late.begin(), moved.begin(), moved.end());
      };
      settle(split.validation, split.test);
      settle(split.train, split.validation);
      if (split.validation.empty()) settle(split.train, split.test);
      break;
    }
    case SplitMode::inductive: {
      // Hold out a node set; edges touching it are evaluation-only.
      std::vector<NodeId> nodes(graph.num_nodes());
      std::iota(nodes.begin(), nodes.end(), NodeId{0});
      std::shuffle(nodes.begin(), nodes.end(), rng);
      const auto n_hold = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround((1.0 - spec.train_fraction) / 2.0 *
                                                   static_cast<double>(graph.num_nodes()))));
      std::vector<bool> held(graph.num_nodes(), false);
      for (std::size_t i = 0; i < n_hold && i < nodes.size(); ++i) held[nodes[i]] = true;
      std::vector<EdgeExample> touching;
      for (const auto& ex : all) {
        if (held[ex.src] || held[ex.dst]) {
          touching.push_back(ex);
        } else {
          split.train.push_back(ex);
        }
      }
      std::shuffle(split.train.begin(), split.train.end(), rng);
      std::shuffle(touching.begin(), touching.end(), rng);
      const std::size_t n_val = touching.size() / 2;
      split.validation.assign(touching.begin(), touching.begin() + static_cast<std::ptrdiff_t>(n_val));
      split.test.assign(touching.begin() + static_cast<std::ptrdiff_t>(n_val), touching.end());
      for (NodeId v = 0; v < graph.num_nodes(); ++v) {
        if (held[v]) split.held_out_nodes.push_back(v);
      }
      break;
    }
  }
  if (spec.deduplicate_eval) deduplicate(split);
  return split;
}

double unseen_fraction(const std::vector<EdgeExample>& examples, const std::vector<NodeId>& unseen) {
  if (examples.empty()) return 0.0;
  std::unordered_set<NodeId> set(unseen.begin(), unseen.end());
  std::size_t count = 0;
  for (const auto& e : examples) {
    if (set.contains(e.src) || set.contains(e.dst)) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(examples.size());
}

}  // namespace adagnn::graphdata
