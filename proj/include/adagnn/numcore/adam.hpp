#pragma once

#include <cstddef>
#include <vector>

#include "adagnn/numcore/tensor.hpp"

namespace adagnn::numcore {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction over a fixed parameter list.
class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamOptions options = {});

  /// Applies one update from the gradients stored on the parameters.
  /// Throws if any parameter has no gradient.
  void step();

  /// Clears the gradient of every parameter.
  void zero_grad();

  [[nodiscard]] std::size_t step_count() const { return step_count_; }
  [[nodiscard]] const std::vector<double>& first_moment(std::size_t i) const { return m_.at(i); }
  [[nodiscard]] const std::vector<double>& second_moment(std::size_t i) const { return v_.at(i); }
  [[nodiscard]] const AdamOptions& options() const { return options_; }

 private:
  std::vector<Tensor> params_;
  AdamOptions options_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::size_t step_count_ = 0;
};

}  // namespace adagnn::numcore
