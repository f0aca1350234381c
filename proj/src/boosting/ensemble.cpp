#include "adagnn/boosting/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "adagnn/boosting/weights.hpp"
#include "adagnn/eval/metrics.hpp"
#include "adagnn/gnn/loss.hpp"
#include "adagnn/numcore/adam.hpp"
#include "adagnn/numcore/ops.hpp"
#include "adagnn/numcore/tape.hpp"

namespace adagnn::boosting {

namespace nc = numcore;
using graphdata::NodeId;

namespace {

void check_alphas(std::size_t learners, std::span<const double> alphas) {
  if (learners == 0) throw BoostError("combine: no learners");
  if (alphas.size() != learners) throw BoostError("combine: alpha count does not match learner count");
  double total = 0.0;
  for (double a : alphas) {
    if (!(a >= 0.0)) throw BoostError("combine: alphas must be non-negative");
    total += a;
  }
  if (std::abs(total - 1.0) > 1e-9) throw BoostError("combine: alphas sum to " + std::to_string(total) + ", not 1");
}

}  // namespace

std::vector<double> combine_scores(std::span<const std::vector<double>> per_learner, std::span<const double> alphas) {
  check_alphas(per_learner.size(), alphas);
  const std::size_t n = per_learner.front().size();
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < per_learner.size(); ++k) {
    if (per_learner[k].size() != n) throw BoostError("combine: learners scored different example counts");
    for (std::size_t i = 0; i < n; ++i) out[i] += alphas[k] * per_learner[k][i];
  }
  // Rounding can leave a convex combination a hair outside [min, max].
  for (std::size_t i = 0; i < n; ++i) {
    double lo = per_learner[0][i], hi = lo;
    for (const auto& s : per_learner) {
      lo = std::min(lo, s[i]);
      hi = std::max(hi, s[i]);
    }
    out[i] = std::clamp(out[i], lo, hi);
  }
  return out;
}

Tensor combine_distributions(std::span<const Tensor> per_learner, std::span<const double> alphas) {
  check_alphas(per_learner.size(), alphas);
  const auto shape = per_learner.front().shape();
  std::vector<double> out(shape.size(), 0.0);
  for (std::size_t k = 0; k < per_learner.size(); ++k) {
    if (per_learner[k].shape() != shape) throw BoostError("combine: learners produced different shapes");
    const auto v = per_learner[k].values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += alphas[k] * v[i];
  }
  return Tensor(shape, std::move(out));
}

std::vector<double> normalized_alphas(std::span<const gnn::WeakLearnerParams> learners) {
  if (learners.empty()) throw BoostError("combine: no learners");
  std::vector<double> a;
  for (const auto& l : learners) {
    if (!(l.alpha >= 0.0)) throw BoostError("combine: negative learner alpha");
    a.push_back(l.alpha);
  }
  const double total = std::accumulate(a.begin(), a.end(), 0.0);
  if (!(total > 0.0)) return std::vector<double>(a.size(), 1.0 / static_cast<double>(a.size()));
  for (double& x : a) x /= total;
  return a;
}

double combine_pairwise(std::span<const gnn::WeakLearnerParams> learners, const gnn::GraphContext& context,
                        const graphdata::EdgeExample& pair, std::uint64_t seed) {
  const auto alphas = normalized_alphas(learners);
  std::vector<std::vector<double>> scores;
  for (const auto& l : learners) scores.push_back(gnn::score_pairs(l, context, std::span(&pair, 1), seed));
  return combine_scores(scores, alphas).front();
}

std::vector<double> combine_node(std::span<const gnn::WeakLearnerParams> learners, const gnn::GraphContext& context,
                                 NodeId node, std::uint64_t seed) {
  const auto alphas = normalized_alphas(learners);
  std::vector<Tensor> dists;
  for (const auto& l : learners) dists.push_back(gnn::predict_nodes(l, context, std::span(&node, 1), seed));
  const Tensor r = combine_distributions(dists, alphas);
  return {r.values().begin(), r.values().end()};
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::none: return "none";
    case StopReason::perfect_fit: return "perfect fit";
    case StopReason::no_correction: return "no correction";
    case StopReason::budget: return "budget";
    case StopReason::weak_learning: return "weak learning violated";
  }
  return "none";
}

StopReason parse_stop_reason(const std::string& text) {
  for (auto r : {StopReason::none, StopReason::perfect_fit, StopReason::no_correction, StopReason::budget,
                 StopReason::weak_learning}) {
    if (to_string(r) == text) return r;
  }
  throw BoostError("unknown stop reason '" + text + "'");
}

StopDecision should_stop(std::size_t learners, std::size_t max_learners, const std::vector<bool>& previous_wrong,
                         const std::vector<bool>& current_wrong, bool require_correction) {
  if (std::ranges::none_of(current_wrong, [](bool w) { return w; })) return {true, StopReason::perfect_fit, false};
  if (require_correction && !previous_wrong.empty()) {
    if (previous_wrong.size() != current_wrong.size()) throw BoostError("should_stop: round sizes differ");
    bool corrected = false;
    for (std::size_t i = 0; i < current_wrong.size() && !corrected; ++i) {
      corrected = previous_wrong[i] && !current_wrong[i];
    }
    if (!corrected) return {true, StopReason::no_correction, true};
  }
  if (learners >= max_learners) return {true, StopReason::budget, false};
  return {};
}

std::pair<Tensor, Tensor> concat_pair_embeddings(std::span<const gnn::WeakLearnerParams> learners,
                                                 const gnn::GraphContext& context,
                                                 std::span<const graphdata::EdgeExample> pairs, std::uint64_t seed) {
  if (learners.empty()) throw BoostError("concat_nn: no learners");
  std::vector<Tensor> left, right;
  for (const auto& l : learners) {
    gnn::BatchNeighborhoods a, b;
    for (const auto& p : pairs) {
      a.add(gnn::inference_neighborhood(context, l.config, p.src, p.dst, p.time, true, seed));
      b.add(gnn::inference_neighborhood(context, l.config, p.dst, p.src, p.time, true, seed));
    }
    left.push_back(gnn::encode_batch(l.encoder, l.config, context.features, a));
    right.push_back(gnn::encode_batch(l.encoder, l.config, context.features, b));
  }
  return {nc::concat_columns(left), nc::concat_columns(right)};
}

Tensor concat_node_embeddings(std::span<const gnn::WeakLearnerParams> learners, const gnn::GraphContext& context,
                              std::span<const NodeId> nodes, std::uint64_t seed) {
  if (learners.empty()) throw BoostError("concat_nn: no learners");
  std::vector<Tensor> parts;
  for (const auto& l : learners) {
    gnn::BatchNeighborhoods batch;
    batch.include_self = l.config.include_self_in_node_task;
    for (NodeId v : nodes) {
      batch.add(gnn::inference_neighborhood(context, l.config, v, std::nullopt, std::nullopt, batch.include_self, seed));
    }
    parts.push_back(gnn::encode_batch(l.encoder, l.config, context.features, batch));
  }
  return nc::concat_columns(parts);
}

namespace {

void check_decoder_input(const gnn::MlpDecoder& decoder, const Tensor& z) {
  if (decoder.input_dim() != z.cols()) {
    throw BoostError("concat_nn: decoder expects " + std::to_string(decoder.input_dim()) +
                     " inputs, concatenated embedding has " + std::to_string(z.cols()));
  }
}

Tensor pair_forward(const gnn::MlpDecoder& decoder, const Tensor& product) {
  return nc::sigmoid(decoder.logits(product));
}

}  // namespace

std::vector<double> concat_pair_scores(const gnn::MlpDecoder& decoder, const Tensor& zi, const Tensor& zj) {
  check_decoder_input(decoder, zi);
  const Tensor s = pair_forward(decoder, nc::mul(zi, zj));
  return {s.values().begin(), s.values().end()};
}

Tensor concat_node_scores(const gnn::MlpDecoder& decoder, const Tensor& z) {
  check_decoder_input(decoder, z);
  return gnn::decode_node_batch(decoder, z);
}

std::vector<double> concat_nn_predict(std::span<const gnn::WeakLearnerParams> learners, const ConcatDecoder& decoder,
                                      const gnn::GraphContext& context,
                                      std::span<const graphdata::EdgeExample> pairs, std::uint64_t seed) {
  if (!decoder.pair) throw BoostError("concat_nn: no pairwise decoder trained");
  const auto [zi, zj] = concat_pair_embeddings(learners, context, pairs, seed);
  return concat_pair_scores(*decoder.pair, zi, zj);
}

Tensor concat_nn_predict_nodes(std::span<const gnn::WeakLearnerParams> learners, const ConcatDecoder& decoder,
                               const gnn::GraphContext& context, std::span<const NodeId> nodes, std::uint64_t seed) {
  if (!decoder.node) throw BoostError("concat_nn: no node decoder trained");
  return concat_node_scores(*decoder.node, concat_node_embeddings(learners, context, nodes, seed));
}

ConcatInputs concat_inputs(std::span<const gnn::WeakLearnerParams> learners, const gnn::GraphContext& context,
                           const gnn::ExampleSet& examples, std::uint64_t seed) {
  ConcatInputs in;
  if (!examples.edges.empty()) {
    std::tie(in.zi, in.zj) = concat_pair_embeddings(learners, context, examples.edges, seed);
    for (const auto& e : examples.edges) in.labels.push_back(e.label);
  }
  if (!examples.nodes.empty()) {
    std::vector<NodeId> ids;
    for (const auto& n : examples.nodes) {
      ids.push_back(n.node);
      in.node_labels.push_back(n.label);
    }
    in.zn = concat_node_embeddings(learners, context, ids, seed);
  }
  return in;
}

namespace {

std::vector<Tensor> decoder_tensors(const gnn::MlpDecoder& d) {
  std::vector<Tensor> out;
  for (auto& [name, t] : d.named()) out.push_back(t);
  return out;
}

// Shared mini-batch loop: `batch_loss(rows)` builds the loss of one batch,
// `metric()` scores the validation set (higher is better, NaN when absent).
template <typename LossFn, typename MetricFn>
gnn::MlpDecoder train_decoder(gnn::MlpDecoder decoder, std::size_t rows, const ConcatTrainOptions& options,
                              std::mt19937_64& rng, LossFn batch_loss, MetricFn metric) {
  nc::Adam adam(decoder_tensors(decoder), {.learning_rate = options.learning_rate});
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::optional<gnn::MlpDecoder> best;
  double best_metric = -std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    std::ranges::shuffle(order, rng);
    for (std::size_t begin = 0; begin < rows; begin += options.batch_size) {
      const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                         order.begin() + static_cast<std::ptrdiff_t>(std::min(rows, begin + options.batch_size)));
      nc::Tape tape;
      nc::TapeScope scope(tape);
      const Tensor loss = batch_loss(decoder, idx);
      nc::backward(loss, tape);
      adam.step();
      adam.zero_grad();
    }
    const double m = metric(decoder);
    if (std::isnan(m)) continue;
    if (m > best_metric) {
      best_metric = m;
      best = decoder.clone();
      since_best = 0;
    } else if (++since_best >= options.patience && options.patience > 0) {
      break;
    }
  }
  return best ? *best : decoder;
}

}  // namespace

ConcatDecoder fit_concat_decoder(std::size_t num_learners, const ConcatInputs& train, const ConcatInputs& validation,
                                 const ConcatTrainOptions& options, std::uint64_t seed) {
  ConcatDecoder out;
  out.num_learners = num_learners;
  std::mt19937_64 rng(seed);
  if (!train.labels.empty()) {
    const Tensor product = nc::mul(train.zi, train.zj);
    const Tensor val_product = validation.labels.empty() ? Tensor() : nc::mul(validation.zi, validation.zj);
    const bool has_val = std::ranges::count(validation.labels, 1) > 0;
    auto loss = [&](const gnn::MlpDecoder& d, const std::vector<std::size_t>& idx) {
      std::vector<int> y;
      for (auto i : idx) y.push_back(train.labels[i]);
      const std::vector<double> w(idx.size(), 1.0);
      const Tensor s = pair_forward(d, nc::gather_rows(product, idx));
      return nc::affine(gnn::link_loss(s, y, w), 1.0 / static_cast<double>(idx.size()), 0.0);
    };
    auto metric = [&](const gnn::MlpDecoder& d) {
      if (!has_val) return std::numeric_limits<double>::quiet_NaN();
      const Tensor s = pair_forward(d, val_product);
      return eval::average_precision(s.values(), validation.labels);
    };
    out.pair = train_decoder(gnn::MlpDecoder::init(product.cols(), options.hidden_dim, 1, rng), product.rows(),
                             options, rng, loss, metric);
  }
  if (!train.node_labels.empty()) {
    const std::size_t classes = train.node_labels.front().size();
    const bool has_val = !validation.node_labels.empty();
    auto loss = [&](const gnn::MlpDecoder& d, const std::vector<std::size_t>& idx) {
      std::vector<std::vector<double>> y;
      for (auto i : idx) y.push_back(train.node_labels[i]);
      const std::vector<double> w(idx.size(), 1.0);
      const Tensor r = gnn::decode_node_batch(d, nc::gather_rows(train.zn, idx));
      return nc::affine(gnn::node_loss(r, y, w), 1.0 / static_cast<double>(idx.size()), 0.0);
    };
    auto metric = [&](const gnn::MlpDecoder& d) {
      if (!has_val) return std::numeric_limits<double>::quiet_NaN();
      std::vector<graphdata::NodeExample> nodes;
      for (const auto& y : validation.node_labels) nodes.push_back({0, y, 1.0});
      return gnn::node_average_precision(gnn::decode_node_batch(d, validation.zn), nodes);
    };
    out.node = train_decoder(gnn::MlpDecoder::init(train.zn.cols(), options.hidden_dim, classes, rng),
                             train.zn.rows(), options, rng, loss, metric);
  }
  return out;
}

}  // namespace adagnn::boosting
