#include "adagnn/gnn/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "adagnn/eval/metrics.hpp"
#include "adagnn/gnn/loss.hpp"
#include "adagnn/numcore/adam.hpp"
#include "adagnn/numcore/ops.hpp"
#include "adagnn/numcore/tape.hpp"

namespace adagnn::gnn {

namespace nc = numcore;
using graphdata::NodeId;

std::string to_string(Task task) {
  switch (task) {
    case Task::link_prediction: return "link_prediction";
    case Task::node_recommendation: return "node_recommendation";
    case Task::multitask: return "multitask";
  }
  return "unknown";
}

Task parse_task(const std::string& text) {
  if (text == "link_prediction" || text == "link") return Task::link_prediction;
  if (text == "node_recommendation" || text == "recommend") return Task::node_recommendation;
  if (text == "multitask") return Task::multitask;
  throw ConfigError("unknown task '" + text + "' (expected link_prediction, node_recommendation or multitask)");
}

std::vector<std::pair<std::string, Tensor>> WeakLearnerParams::named() const {
  auto out = encoder.named();
  for (auto& entry : out) entry.first = "encoder." + entry.first;
  if (node_decoder) {
    for (auto& [name, t] : node_decoder->named()) out.emplace_back("node_decoder." + name, t);
  }
  return out;
}

WeakLearnerParams WeakLearnerParams::clone() const {
  WeakLearnerParams p;
  p.config = config;
  p.encoder = encoder.clone();
  if (node_decoder) p.node_decoder = node_decoder->clone();
  p.alpha = alpha;
  return p;
}

void WeakLearnerParams::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("weak learner: alpha must be finite and >= 0");
  for (const auto& [name, t] : named()) {
    for (double v : t.values()) {
      if (!std::isfinite(v)) throw ConfigError("weak learner: tensor '" + name + "' has a non-finite entry");
    }
  }
}

void TrainHyper::validate(bool allow_off_grid) const {
  if (!(learning_rate > 0.0)) throw ConfigError("training: learning_rate must be positive");
  if (batch_size == 0) throw ConfigError("training: batch_size must be positive");
  if (!(multitask_mix >= 0.0 && multitask_mix <= 1.0)) throw ConfigError("training: multitask_mix must lie in [0,1]");
  if (allow_off_grid) return;
  if (learning_rate != 1e-4 && learning_rate != 5e-4 && learning_rate != 1e-3) {
    throw ConfigError("training: learning_rate must be one of {1e-4, 5e-4, 1e-3}, got " + std::to_string(learning_rate));
  }
}

GraphContext GraphContext::build(const graphdata::Graph& graph, std::span<const EdgeExample> message_edges) {
  GraphContext ctx;
  ctx.graph = &graph;
  ctx.features = feature_tensor(graph);
  ctx.adjacency = graphdata::Adjacency::from_examples(graph.num_nodes(), message_edges);
  ctx.num_labels = graph.node_labels() ? graph.node_labels()->cols : 0;
  return ctx;
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

graphdata::NeighborhoodSample draw(const GraphContext& ctx, const EncoderConfig& config, NodeId center,
                                   std::optional<NodeId> exclude, std::optional<double> time, bool include_self,
                                   std::mt19937_64& rng) {
  graphdata::NeighborSampleOptions opts;
  opts.sample_size = config.neighbor_sample_size;
  opts.exclude = exclude;
  opts.time_cutoff = time;
  opts.include_self = include_self;
  return graphdata::sample_neighbors(ctx.adjacency, center, opts, rng);
}

std::vector<double> mean_one_weights(std::span<const double> raw) {
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  if (!(total > 0.0)) throw ConfigError("training: example weights must sum to a positive value");
  std::vector<double> out(raw.begin(), raw.end());
  const double scale = static_cast<double>(raw.size()) / total;
  for (double& w : out) w *= scale;
  return out;
}

// Encodes both endpoints of each pair in one pass and returns s (B,1).
Tensor pair_predictions(const WeakLearnerParams& p, const GraphContext& ctx, std::span<const EdgeExample> pairs,
                        const std::function<graphdata::NeighborhoodSample(NodeId, NodeId, std::optional<double>)>& sample) {
  BatchNeighborhoods batch;
  batch.include_self = true;
  for (const auto& ex : pairs) batch.add(sample(ex.src, ex.dst, ex.time));
  for (const auto& ex : pairs) batch.add(sample(ex.dst, ex.src, ex.time));
  const Tensor z = encode_batch(p.encoder, p.config, ctx.features, batch);
  std::vector<std::size_t> first(pairs.size()), second(pairs.size());
  std::iota(first.begin(), first.end(), std::size_t{0});
  std::iota(second.begin(), second.end(), pairs.size());
  return decode_pairwise_batch(nc::gather_rows(z, first), nc::gather_rows(z, second));
}

Tensor node_predictions(const WeakLearnerParams& p, const GraphContext& ctx, std::span<const NodeId> nodes,
                        const std::function<graphdata::NeighborhoodSample(NodeId)>& sample) {
  BatchNeighborhoods batch;
  batch.include_self = p.config.include_self_in_node_task;
  for (NodeId v : nodes) batch.add(sample(v));
  return decode_node_batch(*p.node_decoder, encode_batch(p.encoder, p.config, ctx.features, batch));
}

double validation_metric(const WeakLearnerParams& p, const GraphContext& ctx, Task task, const ExampleSet& val,
                         std::uint64_t seed) {
  std::vector<double> parts;
  if (has_link_part(task) && !val.edges.empty()) {
    std::vector<int> labels;
    for (const auto& ex : val.edges) labels.push_back(ex.label);
    if (std::ranges::count(labels, 1) > 0) {
      parts.push_back(eval::average_precision(score_pairs(p, ctx, val.edges, seed), labels));
    }
  }
  if (has_node_part(task) && !val.nodes.empty()) {
    std::vector<NodeId> ids;
    for (const auto& ex : val.nodes) ids.push_back(ex.node);
    parts.push_back(node_average_precision(predict_nodes(p, ctx, ids, seed), val.nodes));
  }
  if (parts.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(parts.begin(), parts.end(), 0.0) / static_cast<double>(parts.size());
}

}  // namespace

graphdata::NeighborhoodSample inference_neighborhood(const GraphContext& context, const EncoderConfig& config,
                                                     NodeId center, std::optional<NodeId> exclude,
                                                     std::optional<double> time_cutoff, bool include_self,
                                                     std::uint64_t seed) {
  std::uint64_t key = splitmix(seed ^ splitmix(center));
  key = splitmix(key ^ (exclude ? *exclude + 1 : 0));
  std::mt19937_64 rng(key);
  return draw(context, config, center, exclude, time_cutoff, include_self, rng);
}

std::vector<double> score_pairs(const WeakLearnerParams& learner, const GraphContext& context,
                                std::span<const EdgeExample> pairs, std::uint64_t seed) {
  constexpr std::size_t kChunk = 256;
  std::vector<double> out;
  out.reserve(pairs.size());
  auto sample = [&](NodeId c, NodeId other, std::optional<double> t) {
    return inference_neighborhood(context, learner.config, c, other, t, true, seed);
  };
  for (std::size_t begin = 0; begin < pairs.size(); begin += kChunk) {
    const auto chunk = pairs.subspan(begin, std::min(kChunk, pairs.size() - begin));
    const Tensor s = pair_predictions(learner, context, chunk, sample);
    out.insert(out.end(), s.values().begin(), s.values().end());
  }
  return out;
}

Tensor predict_nodes(const WeakLearnerParams& learner, const GraphContext& context, std::span<const NodeId> nodes,
                     std::uint64_t seed) {
  if (!learner.node_decoder) throw ConfigError("predict_nodes: learner has no node decoder");
  constexpr std::size_t kChunk = 512;
  const std::size_t c = learner.node_decoder->output_dim();
  std::vector<double> values;
  values.reserve(nodes.size() * c);
  auto sample = [&](NodeId v) {
    return inference_neighborhood(context, learner.config, v, std::nullopt, std::nullopt,
                                  learner.config.include_self_in_node_task, seed);
  };
  for (std::size_t begin = 0; begin < nodes.size(); begin += kChunk) {
    const Tensor r = node_predictions(learner, context, nodes.subspan(begin, std::min(kChunk, nodes.size() - begin)), sample);
    values.insert(values.end(), r.values().begin(), r.values().end());
  }
  return Tensor({nodes.size(), c}, std::move(values));
}

Tensor embed_nodes(const WeakLearnerParams& learner, const GraphContext& context, std::span<const NodeId> nodes,
                   std::uint64_t seed) {
  constexpr std::size_t kChunk = 512;
  const std::size_t d = learner.config.embed_dim;
  std::vector<double> values;
  values.reserve(nodes.size() * d);
  for (std::size_t begin = 0; begin < nodes.size(); begin += kChunk) {
    BatchNeighborhoods batch;
    batch.include_self = true;
    for (std::size_t i = begin; i < std::min(nodes.size(), begin + kChunk); ++i) {
      batch.add(inference_neighborhood(context, learner.config, nodes[i], std::nullopt, std::nullopt, true, seed));
    }
    const Tensor z = encode_batch(learner.encoder, learner.config, context.features, batch);
    values.insert(values.end(), z.values().begin(), z.values().end());
  }
  return Tensor({nodes.size(), d}, std::move(values));
}

double node_average_precision(const Tensor& predictions, std::span<const NodeExample> nodes) {
  if (predictions.rows() != nodes.size()) throw ConfigError("node_average_precision: row count mismatch");
  std::vector<double> scores;
  std::vector<int> labels;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].label.size() != predictions.cols()) throw ConfigError("node_average_precision: label width mismatch");
    for (std::size_t c = 0; c < predictions.cols(); ++c) {
      scores.push_back(predictions.at(i, c));
      labels.push_back(nodes[i].label[c] > 0.0 ? 1 : 0);
    }
  }
  return eval::average_precision(scores, labels);
}

FitResult fit_weak_learner(const GraphContext& context, Task task, const ExampleSet& train,
                           const ExampleSet& validation, const EncoderConfig& config, const TrainHyper& hyper,
                           std::uint64_t seed) {
  config.validate(true);
  hyper.validate(true);
  if (context.features.cols() != config.input_dim) {
    throw ConfigError("fit: feature dimension " + std::to_string(context.features.cols()) +
                      " does not match input_dim " + std::to_string(config.input_dim));
  }
  const bool link = has_link_part(task);
  const bool node = has_node_part(task);
  if ((link && train.edges.empty()) || (node && train.nodes.empty())) {
    throw ConfigError("fit: empty training set for task " + to_string(task));
  }
  if (node && context.num_labels == 0) throw ConfigError("fit: node task requires node labels");

  std::mt19937_64 rng(seed);
  FitResult result;
  WeakLearnerParams& p = result.params;
  p.config = config;
  p.encoder = EncoderParams::init(config, rng);
  if (node) {
    const std::size_t hidden = hyper.node_hidden_dim ? hyper.node_hidden_dim : config.embed_dim;
    p.node_decoder = MlpDecoder::init(config.embed_dim, hidden, context.num_labels, rng);
  }
  if (hyper.epochs == 0) return result;

  std::vector<Tensor> tensors;
  // Without self features a node-only learner never touches self_weight.
  const bool self_unused = !link && !config.include_self_in_node_task;
  for (auto& [name, t] : p.named()) {
    if (!(self_unused && name == "encoder.self_weight")) tensors.push_back(t);
  }
  nc::Adam adam(tensors, {.learning_rate = hyper.learning_rate});

  std::vector<double> edge_w, node_w;
  std::vector<int> edge_y;
  std::vector<std::vector<double>> node_y;
  if (link) {
    std::vector<double> raw;
    for (const auto& ex : train.edges) raw.push_back(ex.weight);
    edge_w = mean_one_weights(raw);
    for (const auto& ex : train.edges) edge_y.push_back(ex.label);
  }
  if (node) {
    std::vector<double> raw;
    for (const auto& ex : train.nodes) raw.push_back(ex.weight);
    node_w = mean_one_weights(raw);
    for (const auto& ex : train.nodes) node_y.push_back(ex.label);
  }

  std::vector<std::size_t> edge_order(train.edges.size()), node_order(train.nodes.size());
  std::iota(edge_order.begin(), edge_order.end(), std::size_t{0});
  std::iota(node_order.begin(), node_order.end(), std::size_t{0});
  const std::size_t bs = hyper.batch_size;
  const std::size_t primary = link ? train.edges.size() : train.nodes.size();
  const std::size_t steps = (primary + bs - 1) / bs;
  const std::uint64_t eval_seed = splitmix(seed ^ 0x5eedULL);

  auto train_sample = [&](NodeId c, NodeId other, std::optional<double> t) {
    return draw(context, config, c, other, t, true, rng);
  };
  auto node_sample = [&](NodeId v) {
    return draw(context, config, v, std::nullopt, std::nullopt, config.include_self_in_node_task, rng);
  };

  std::optional<WeakLearnerParams> best;
  double best_metric = -std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    std::ranges::shuffle(edge_order, rng);
    std::ranges::shuffle(node_order, rng);
    double loss_sum = 0.0;
    std::size_t node_cursor = 0;
    for (std::size_t step = 0; step < steps; ++step) {
      nc::Tape tape;
      nc::TapeScope scope(tape);
      std::optional<Tensor> link_part, node_part;
      if (link) {
        const std::size_t begin = step * bs;
        const std::size_t end = std::min(begin + bs, train.edges.size());
        std::vector<EdgeExample> batch;
        std::vector<int> y;
        std::vector<double> w;
        for (std::size_t i = begin; i < end; ++i) {
          batch.push_back(train.edges[edge_order[i]]);
          y.push_back(edge_y[edge_order[i]]);
          w.push_back(edge_w[edge_order[i]]);
        }
        const Tensor s = pair_predictions(p, context, batch, train_sample);
        link_part = nc::affine(link_loss(s, y, w), 1.0 / static_cast<double>(batch.size()), 0.0);
      }
      if (node) {
        const std::size_t count = std::min(bs, train.nodes.size());
        std::vector<NodeId> ids;
        std::vector<std::vector<double>> y;
        std::vector<double> w;
        for (std::size_t i = 0; i < count; ++i) {
          const std::size_t idx = node_order[(node_cursor + i) % train.nodes.size()];
          ids.push_back(train.nodes[idx].node);
          y.push_back(node_y[idx]);
          w.push_back(node_w[idx]);
        }
        node_cursor += count;
        const Tensor r = node_predictions(p, context, ids, node_sample);
        node_part = nc::affine(node_loss(r, y, w), 1.0 / static_cast<double>(count), 0.0);
      }
      const Tensor loss = link && node ? multitask_loss(*link_part, *node_part, hyper.multitask_mix)
                                       : (link ? *link_part : *node_part);
      nc::backward(loss, tape);
      adam.step();
      adam.zero_grad();
      loss_sum += loss.item();
    }
    result.diagnostics.train_loss.push_back(loss_sum / static_cast<double>(steps));

    if (validation.empty()) {
      result.diagnostics.best_epoch = epoch;
      continue;
    }
    const double metric = validation_metric(p, context, task, validation, eval_seed);
    if (std::isnan(metric)) {
      result.diagnostics.best_epoch = epoch;
      continue;
    }
    result.diagnostics.validation_ap.push_back(metric);
    if (metric > best_metric) {
      best_metric = metric;
      best = p.clone();
      result.diagnostics.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= hyper.patience && hyper.patience > 0) {
      result.diagnostics.stopped_early = true;
      break;
    }
  }
  if (best) result.params = std::move(*best);
  return result;
}

}  // namespace adagnn::gnn
