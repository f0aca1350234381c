#pragma once

#include <span>
#include <vector>

#include "adagnn/numcore/tensor.hpp"

namespace adagnn::gnn {

using numcore::Tensor;

/// Weighted binary cross entropy over (B,1) predictions; predictions are
/// clamped to [1e-12, 1-1e-12] before the logarithm.
/// Throws on non-positive weights, labels outside {0,1} or length mismatch.
Tensor link_loss(const Tensor& predictions, std::span<const int> labels, std::span<const double> weights);

/// -sum_i w_i y_i^T log r_i for (B,C) distributions r and label rows y that
/// each sum to 1 (within 1e-9).
Tensor node_loss(const Tensor& predictions, std::span<const std::vector<double>> labels,
                 std::span<const double> weights);

/// mix * link + (1 - mix) * node, mix in [0,1].
Tensor multitask_loss(const Tensor& link, const Tensor& node, double mix);

}  // namespace adagnn::gnn
