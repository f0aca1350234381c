#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "adagnn/graphdata/graph.hpp"
#include "adagnn/graphdata/sampling.hpp"
#include "adagnn/numcore/tensor.hpp"

namespace adagnn::gnn {

using graphdata::NodeId;
using numcore::Tensor;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EncoderKind { mean_pool, attention };

std::string to_string(EncoderKind kind);
EncoderKind parse_encoder_kind(const std::string& text);

struct EncoderConfig {
  EncoderKind kind = EncoderKind::attention;
  std::size_t input_dim = 0;
  std::size_t embed_dim = 16;
  std::size_t num_heads = 1;
  std::size_t num_layers = 1;
  std::size_t neighbor_sample_size = 10;
  bool include_self_in_node_task = false;

  /// Structural checks always; grid membership (heads, neighbors) unless
  /// allow_off_grid is set.
  void validate(bool allow_off_grid = false) const;
  [[nodiscard]] std::size_t head_dim() const { return embed_dim / num_heads; }
};

/// One-layer encoder weights. Mean-pool uses a single neighbor transform;
/// attention uses one transform and one attention vector per head.
struct EncoderParams {
  Tensor self_weight;                     // d_V x d_Z
  std::vector<Tensor> neighbor_weights;   // per head: d_V x d_h
  std::vector<Tensor> attention_vectors;  // per head: 2*d_h x 1 (attention only)
  Tensor combine_weight;                  // 2*d_Z x d_Z
  Tensor combine_bias;                    // 1 x d_Z

  static EncoderParams init(const EncoderConfig& config, std::mt19937_64& rng);
  [[nodiscard]] std::vector<std::pair<std::string, Tensor>> named() const;
  [[nodiscard]] EncoderParams clone() const;
};

/// A batch of centers with their flattened neighbor lists.
/// Neighbors of centers[b] are neighbors[offsets[b] .. offsets[b+1]).
struct BatchNeighborhoods {
  std::vector<NodeId> centers;
  std::vector<NodeId> neighbors;
  std::vector<std::size_t> offsets{0};
  bool include_self = true;

  void add(const graphdata::NeighborhoodSample& sample);
  [[nodiscard]] std::size_t size() const { return centers.size(); }
};

/// Optional capture of per-head attention weights (one (M,1) tensor per head).
struct AttentionTrace {
  std::vector<Tensor> weights;
};

/// Batched encoder: rows of the result are the embeddings of batch.centers.
/// `features` is the constant (num_nodes x d_V) node feature matrix.
Tensor encode_batch(const EncoderParams& params, const EncoderConfig& config, const Tensor& features,
                    const BatchNeighborhoods& batch, AttentionTrace* trace = nullptr);

/// Neighbor aggregate a_i only (before COMBINE), same batching.
Tensor aggregate_batch(const EncoderParams& params, const EncoderConfig& config, const Tensor& features,
                       const BatchNeighborhoods& batch, AttentionTrace* trace = nullptr);

/// Single-node convenience wrapper returning z as a plain vector.
std::vector<double> encode(const EncoderParams& params, const EncoderConfig& config, const graphdata::Graph& graph,
                           NodeId center, const graphdata::NeighborhoodSample& neighborhood);

/// Node features as a constant tensor.
Tensor feature_tensor(const graphdata::Graph& graph);

}  // namespace adagnn::gnn
