#include "adagnn/gnn/loss.hpp"

#include <cmath>
#include <string>

#include "adagnn/numcore/ops.hpp"

namespace adagnn::gnn {

namespace nc = numcore;

namespace {

void check_weights(std::span<const double> weights, const char* what) {
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      throw nc::NumError(std::string(what) + ": weight " + std::to_string(i) + " is not positive (" +
                         std::to_string(weights[i]) + ")");
    }
  }
}

}  // namespace

Tensor link_loss(const Tensor& predictions, std::span<const int> labels, std::span<const double> weights) {
  const std::size_t b = predictions.rows();
  if (predictions.cols() != 1 || labels.size() != b || weights.size() != b) {
    throw nc::NumError("link_loss: predictions " + nc::to_string(predictions.shape()) + " with " +
                       std::to_string(labels.size()) + " labels and " + std::to_string(weights.size()) + " weights");
  }
  check_weights(weights, "link_loss");
  std::vector<double> pos(b), neg(b);
  for (std::size_t i = 0; i < b; ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw nc::NumError("link_loss: labels must be 0 or 1");
    pos[i] = labels[i] == 1 ? weights[i] : 0.0;
    neg[i] = labels[i] == 1 ? 0.0 : weights[i];
  }
  const Tensor log_s = nc::log_clamped(predictions);
  const Tensor log_1ms = nc::log_clamped(nc::affine(predictions, -1.0, 1.0));
  const Tensor total = nc::add(nc::mul(log_s, Tensor::column(std::move(pos))),
                               nc::mul(log_1ms, Tensor::column(std::move(neg))));
  return nc::affine(nc::reduce_sum(total), -1.0, 0.0);
}

Tensor node_loss(const Tensor& predictions, std::span<const std::vector<double>> labels,
                 std::span<const double> weights) {
  const std::size_t b = predictions.rows();
  const std::size_t c = predictions.cols();
  if (labels.size() != b || weights.size() != b) {
    throw nc::NumError("node_loss: predictions " + nc::to_string(predictions.shape()) + " with " +
                       std::to_string(labels.size()) + " labels and " + std::to_string(weights.size()) + " weights");
  }
  check_weights(weights, "node_loss");
  std::vector<double> y;
  y.reserve(b * c);
  for (std::size_t i = 0; i < b; ++i) {
    if (labels[i].size() != c) {
      throw nc::NumError("node_loss: label " + std::to_string(i) + " has " + std::to_string(labels[i].size()) +
                         " entries, expected " + std::to_string(c));
    }
    double sum = 0.0;
    for (double v : labels[i]) {
      if (v < 0.0) throw nc::NumError("node_loss: label " + std::to_string(i) + " has a negative entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw nc::NumError("node_loss: label " + std::to_string(i) + " is not normalized (sum " + std::to_string(sum) +
                         ")");
    }
    y.insert(y.end(), labels[i].begin(), labels[i].end());
  }
  const Tensor weighted = nc::mul(nc::mul(nc::log_clamped(predictions), Tensor({b, c}, std::move(y))),
                                  Tensor::column({weights.begin(), weights.end()}));
  return nc::affine(nc::reduce_sum(weighted), -1.0, 0.0);
}

Tensor multitask_loss(const Tensor& link, const Tensor& node, double mix) {
  if (!(mix >= 0.0 && mix <= 1.0)) throw nc::NumError("multitask_loss: mix must lie in [0,1], got " + std::to_string(mix));
  if (mix == 1.0) return link;
  if (mix == 0.0) return node;
  return nc::add(nc::affine(link, mix, 0.0), nc::affine(node, 1.0 - mix, 0.0));
}

}  // namespace adagnn::gnn
