#pragma once

#include <functional>
#include <span>
#include <vector>

#include "adagnn/numcore/tensor.hpp"

namespace adagnn::numcore {

struct GradCheckEntry {
  std::size_t param_index = 0;
  double max_relative_error = 0.0;
  bool passed = false;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double tolerance = 0.0;

  [[nodiscard]] bool passed() const;
  [[nodiscard]] double max_relative_error() const;
};

/// Compares tape gradients of a scalar program against central finite
/// differences. `program` must rebuild its graph from the current parameter
/// values on every call. Relative error is |a - n| / max(|a|, |n|, floor).
GradCheckReport grad_check(const std::function<Tensor()>& program, std::span<Tensor> params,
                           double tolerance, double step = 1e-5, double floor = 1e-6);

}  // namespace adagnn::numcore
