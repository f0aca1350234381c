#pragma once

#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "adagnn/numcore/tensor.hpp"

namespace adagnn::gnn {

using numcore::Tensor;

/// sigmoid(dot(z_i, z_j)). Symmetric bitwise: the dot product is accumulated
/// over the elementwise products, which commute.
double decode_pairwise(std::span<const double> zi, std::span<const double> zj);

/// Batched pairwise decoder on the tape: rows of zi and zj are paired,
/// result is (B,1).
Tensor decode_pairwise_batch(const Tensor& zi, const Tensor& zj);

/// Dot products only (the logits of the pairwise decoder), (B,1).
Tensor pair_logits(const Tensor& zi, const Tensor& zj);

/// softmax(W2 leaky_relu(z W1 + b1) + b2). Also used, with a single output
/// column replaced by a sigmoid, as the uniform pairwise MLP decoder.
struct MlpDecoder {
  Tensor hidden_weight;  // d_in x h
  Tensor hidden_bias;    // 1 x h
  Tensor out_weight;     // h x d_out
  Tensor out_bias;       // 1 x d_out

  static MlpDecoder init(std::size_t input_dim, std::size_t hidden_dim, std::size_t output_dim, std::mt19937_64& rng);
  static MlpDecoder zeros(std::size_t input_dim, std::size_t hidden_dim, std::size_t output_dim);

  [[nodiscard]] std::size_t input_dim() const { return hidden_weight.rows(); }
  [[nodiscard]] std::size_t output_dim() const { return out_weight.cols(); }
  [[nodiscard]] std::vector<std::pair<std::string, Tensor>> named() const;
  [[nodiscard]] MlpDecoder clone() const;

  /// Pre-activation outputs, (B, d_out).
  [[nodiscard]] Tensor logits(const Tensor& z) const;
};

/// Node recommendation distribution: rows of the result sum to 1.
Tensor decode_node_batch(const MlpDecoder& decoder, const Tensor& z);
std::vector<double> decode_node(const MlpDecoder& decoder, std::span<const double> z);

}  // namespace adagnn::gnn
