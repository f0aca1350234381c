#pragma once

#include <random>

#include "adagnn/numcore/tensor.hpp"

namespace adagnn::numcore {

/// Glorot/Xavier uniform: U(-a, a) with a = sqrt(6 / (rows + cols)).
Tensor glorot_uniform(Shape shape, std::mt19937_64& rng);

}  // namespace adagnn::numcore
