#include "adagnn/numcore/init.hpp"

#include <cmath>

namespace adagnn::numcore {

Tensor glorot_uniform(Shape shape, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(shape.rows + shape.cols));
  std::uniform_real_distribution<double> dist(-a, a);
  std::vector<double> values(shape.size());
  for (double& v : values) v = dist(rng);
  return Tensor(shape, std::move(values), true);
}

}  // namespace adagnn::numcore
