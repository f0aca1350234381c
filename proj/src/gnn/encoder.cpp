#include "adagnn/gnn/encoder.hpp"

#include <unordered_map>

#include "adagnn/numcore/init.hpp"
#include "adagnn/numcore/ops.hpp"

namespace adagnn::gnn {

namespace nc = numcore;

std::string to_string(EncoderKind kind) { return kind == EncoderKind::mean_pool ? "mean_pool" : "attention"; }

EncoderKind parse_encoder_kind(const std::string& text) {
  if (text == "mean_pool") return EncoderKind::mean_pool;
  if (text == "attention") return EncoderKind::attention;
  throw ConfigError("unknown encoder kind '" + text + "' (expected mean_pool or attention)");
}

void EncoderConfig::validate(bool allow_off_grid) const {
  if (input_dim == 0) throw ConfigError("encoder: input_dim must be positive");
  if (embed_dim == 0) throw ConfigError("encoder: embed_dim must be positive");
  if (num_layers != 1) throw ConfigError("encoder: num_layers must be 1, got " + std::to_string(num_layers));
  if (num_heads == 0) throw ConfigError("encoder: num_heads must be positive");
  if (kind == EncoderKind::attention && embed_dim % num_heads != 0) {
    throw ConfigError("encoder: embed_dim " + std::to_string(embed_dim) + " not divisible by num_heads " +
                      std::to_string(num_heads));
  }
  if (kind == EncoderKind::mean_pool && num_heads != 1 && embed_dim % num_heads != 0) {
    throw ConfigError("encoder: embed_dim not divisible by num_heads");
  }
  if (neighbor_sample_size == 0) throw ConfigError("encoder: neighbor_sample_size must be positive");
  if (allow_off_grid) return;
  if (num_heads > 3) throw ConfigError("encoder: num_heads must be in {1,2,3}, got " + std::to_string(num_heads));
  if (neighbor_sample_size != 10 && neighbor_sample_size != 20 && neighbor_sample_size != 30) {
    throw ConfigError("encoder: neighbor_sample_size must be in {10,20,30}, got " +
                      std::to_string(neighbor_sample_size));
  }
}

EncoderParams EncoderParams::init(const EncoderConfig& config, std::mt19937_64& rng) {
  const std::size_t dv = config.input_dim;
  const std::size_t dz = config.embed_dim;
  EncoderParams p;
  p.self_weight = nc::glorot_uniform({dv, dz}, rng);
  if (config.kind == EncoderKind::mean_pool) {
    p.neighbor_weights.push_back(nc::glorot_uniform({dv, dz}, rng));
  } else {
    const std::size_t dh = config.head_dim();
    for (std::size_t h = 0; h < config.num_heads; ++h) {
      p.neighbor_weights.push_back(nc::glorot_uniform({dv, dh}, rng));
      p.attention_vectors.push_back(nc::glorot_uniform({2 * dh, 1}, rng));
    }
  }
  p.combine_weight = nc::glorot_uniform({2 * dz, dz}, rng);
  p.combine_bias = Tensor::zeros({1, dz}, true);
  return p;
}

std::vector<std::pair<std::string, Tensor>> EncoderParams::named() const {
  std::vector<std::pair<std::string, Tensor>> out;
  out.emplace_back("self_weight", self_weight);
  for (std::size_t h = 0; h < neighbor_weights.size(); ++h) {
    out.emplace_back("neighbor_weight." + std::to_string(h), neighbor_weights[h]);
  }
  for (std::size_t h = 0; h < attention_vectors.size(); ++h) {
    out.emplace_back("attention_vector." + std::to_string(h), attention_vectors[h]);
  }
  out.emplace_back("combine_weight", combine_weight);
  out.emplace_back("combine_bias", combine_bias);
  return out;
}

namespace {

Tensor trainable_copy(const Tensor& t) {
  Tensor c = t.clone();
  c.set_requires_grad(t.requires_grad());
  return c;
}

// Compacts the node ids touched by a batch so transforms run once per node.
struct LocalIndex {
  std::vector<std::size_t> nodes;
  std::unordered_map<NodeId, std::size_t> slot;

  std::size_t operator()(NodeId v) {
    auto [it, inserted] = slot.try_emplace(v, nodes.size());
    if (inserted) nodes.push_back(v);
    return it->second;
  }
};

void check_features(const Tensor& features, const EncoderConfig& config, const BatchNeighborhoods& batch) {
  if (features.cols() != config.input_dim) {
    throw ConfigError("encoder: feature dimension " + std::to_string(features.cols()) +
                      " does not match input_dim " + std::to_string(config.input_dim));
  }
  if (batch.offsets.size() != batch.centers.size() + 1 || batch.offsets.back() != batch.neighbors.size()) {
    throw ConfigError("encoder: malformed neighborhood batch");
  }
  for (NodeId v : batch.centers) {
    if (v >= features.rows()) throw ConfigError("encoder: center " + std::to_string(v) + " has no features");
  }
  for (NodeId v : batch.neighbors) {
    if (v >= features.rows()) throw ConfigError("encoder: neighbor " + std::to_string(v) + " has no features");
  }
}

}  // namespace

EncoderParams EncoderParams::clone() const {
  EncoderParams p;
  p.self_weight = trainable_copy(self_weight);
  for (const auto& w : neighbor_weights) p.neighbor_weights.push_back(trainable_copy(w));
  for (const auto& a : attention_vectors) p.attention_vectors.push_back(trainable_copy(a));
  p.combine_weight = trainable_copy(combine_weight);
  p.combine_bias = trainable_copy(combine_bias);
  return p;
}

void BatchNeighborhoods::add(const graphdata::NeighborhoodSample& sample) {
  centers.push_back(sample.center);
  neighbors.insert(neighbors.end(), sample.neighbor_ids.begin(), sample.neighbor_ids.end());
  offsets.push_back(neighbors.size());
}

Tensor aggregate_batch(const EncoderParams& params, const EncoderConfig& config, const Tensor& features,
                       const BatchNeighborhoods& batch, AttentionTrace* trace) {
  check_features(features, config, batch);
  LocalIndex local;
  std::vector<std::size_t> nbr_slots;
  nbr_slots.reserve(batch.neighbors.size());
  for (NodeId v : batch.neighbors) nbr_slots.push_back(local(v));

  if (config.kind == EncoderKind::mean_pool) {
    const Tensor xu = nc::gather_rows(features, local.nodes);
    const Tensor hu = nc::matmul(xu, params.neighbor_weights.at(0));
    return nc::segment_mean(nc::gather_rows(hu, nbr_slots), batch.offsets);
  }

  // Attention: every neighbor slot is paired with its center's transform.
  std::vector<std::size_t> center_slots;
  if (batch.include_self) {
    center_slots.reserve(batch.neighbors.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const std::size_t c = local(batch.centers[b]);
      for (std::size_t i = batch.offsets[b]; i < batch.offsets[b + 1]; ++i) center_slots.push_back(c);
    }
  }
  const Tensor xu = nc::gather_rows(features, local.nodes);
  std::vector<Tensor> heads;
  for (std::size_t h = 0; h < config.num_heads; ++h) {
    const Tensor hu = nc::matmul(xu, params.neighbor_weights.at(h));
    const Tensor hn = nc::gather_rows(hu, nbr_slots);
    // a^T [h_c || h_n] split into its two halves, each scored once per touched node.
    const Tensor& a = params.attention_vectors.at(h);
    const Tensor none = Tensor::zeros(hu.shape());
    Tensor raw = nc::gather_rows(nc::matmul(nc::concat_columns(none, hu), a), nbr_slots);
    if (batch.include_self) {
      raw = nc::add(nc::gather_rows(nc::matmul(nc::concat_columns(hu, none), a), center_slots), raw);
    }
    const Tensor scores = nc::leaky_relu(raw);
    const Tensor weights = nc::segment_softmax(scores, batch.offsets);
    if (trace) trace->weights.push_back(weights);
    heads.push_back(nc::segment_sum(nc::mul(hn, weights), batch.offsets));
  }
  return heads.size() == 1 ? heads.front() : nc::concat_columns(heads);
}

Tensor encode_batch(const EncoderParams& params, const EncoderConfig& config, const Tensor& features,
                    const BatchNeighborhoods& batch, AttentionTrace* trace) {
  const Tensor agg = aggregate_batch(params, config, features, batch, trace);
  const Tensor self = batch.include_self
                          ? nc::matmul(nc::gather_rows(features, batch.centers), params.self_weight)
                          : Tensor::zeros({batch.size(), config.embed_dim});
  return nc::leaky_relu(nc::add(nc::matmul(nc::concat_columns(self, agg), params.combine_weight), params.combine_bias));
}

Tensor feature_tensor(const graphdata::Graph& graph) {
  const auto& f = graph.node_features();
  if (f.rows != graph.num_nodes() || f.cols == 0) throw ConfigError("encoder: graph has no node features attached");
  return Tensor({f.rows, f.cols}, f.data);
}

std::vector<double> encode(const EncoderParams& params, const EncoderConfig& config, const graphdata::Graph& graph,
                           NodeId center, const graphdata::NeighborhoodSample& neighborhood) {
  if (neighborhood.center != center) throw ConfigError("encode: neighborhood was sampled for a different center");
  BatchNeighborhoods batch;
  batch.include_self = neighborhood.include_self;
  batch.add(neighborhood);
  const Tensor z = encode_batch(params, config, feature_tensor(graph), batch);
  return {z.values().begin(), z.values().end()};
}

}  // namespace adagnn::gnn
