#include "adagnn/gnn/decoder.hpp"

#include <cmath>
#include <stdexcept>

#include "adagnn/numcore/init.hpp"
#include "adagnn/numcore/ops.hpp"

namespace adagnn::gnn {

namespace nc = numcore;

double decode_pairwise(std::span<const double> zi, std::span<const double> zj) {
  if (zi.size() != zj.size()) {
    throw nc::NumError("decode_pairwise: embedding sizes differ (" + std::to_string(zi.size()) + " vs " +
                       std::to_string(zj.size()) + ")");
  }
  double dot = 0.0;
  for (std::size_t k = 0; k < zi.size(); ++k) dot += zi[k] * zj[k];
  return 1.0 / (1.0 + std::exp(-dot));
}

Tensor pair_logits(const Tensor& zi, const Tensor& zj) {
  if (zi.shape() != zj.shape()) {
    throw nc::NumError("decode_pairwise: shape mismatch " + nc::to_string(zi.shape()) + " vs " +
                       nc::to_string(zj.shape()));
  }
  return nc::matmul(nc::mul(zi, zj), Tensor::filled({zi.cols(), 1}, 1.0));
}

Tensor decode_pairwise_batch(const Tensor& zi, const Tensor& zj) { return nc::sigmoid(pair_logits(zi, zj)); }

MlpDecoder MlpDecoder::init(std::size_t input_dim, std::size_t hidden_dim, std::size_t output_dim,
                            std::mt19937_64& rng) {
  MlpDecoder d;
  d.hidden_weight = nc::glorot_uniform({input_dim, hidden_dim}, rng);
  d.hidden_bias = Tensor::zeros({1, hidden_dim}, true);
  d.out_weight = nc::glorot_uniform({hidden_dim, output_dim}, rng);
  d.out_bias = Tensor::zeros({1, output_dim}, true);
  return d;
}

MlpDecoder MlpDecoder::zeros(std::size_t input_dim, std::size_t hidden_dim, std::size_t output_dim) {
  MlpDecoder d;
  d.hidden_weight = Tensor::zeros({input_dim, hidden_dim}, true);
  d.hidden_bias = Tensor::zeros({1, hidden_dim}, true);
  d.out_weight = Tensor::zeros({hidden_dim, output_dim}, true);
  d.out_bias = Tensor::zeros({1, output_dim}, true);
  return d;
}

std::vector<std::pair<std::string, Tensor>> MlpDecoder::named() const {
  return {{"hidden_weight", hidden_weight}, {"hidden_bias", hidden_bias}, {"out_weight", out_weight},
          {"out_bias", out_bias}};
}

MlpDecoder MlpDecoder::clone() const {
  auto copy = [](const Tensor& t) {
    Tensor c = t.clone();
    c.set_requires_grad(t.requires_grad());
    return c;
  };
  return {copy(hidden_weight), copy(hidden_bias), copy(out_weight), copy(out_bias)};
}

Tensor MlpDecoder::logits(const Tensor& z) const {
  const Tensor h = nc::leaky_relu(nc::add(nc::matmul(z, hidden_weight), hidden_bias));
  return nc::add(nc::matmul(h, out_weight), out_bias);
}

Tensor decode_node_batch(const MlpDecoder& decoder, const Tensor& z) { return nc::softmax_rows(decoder.logits(z)); }

std::vector<double> decode_node(const MlpDecoder& decoder, std::span<const double> z) {
  const Tensor zt({1, z.size()}, std::vector<double>(z.begin(), z.end()));
  const Tensor r = decode_node_batch(decoder, zt);
  return {r.values().begin(), r.values().end()};
}

}  // namespace adagnn::gnn
