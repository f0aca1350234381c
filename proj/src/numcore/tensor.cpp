#include "adagnn/numcore/tensor.hpp"

#include <utility>

namespace adagnn::numcore {

std::string to_string(const Shape& shape) {
  return "(" + std::to_string(shape.rows) + "," + std::to_string(shape.cols) + ")";
}

Tensor::Tensor() : impl_(std::make_shared<TensorImpl>()) {}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad)
    : impl_(std::make_shared<TensorImpl>()) {
  if (shape.size() != values.size()) {
    throw NumError("tensor: shape " + to_string(shape) + " does not match " +
                   std::to_string(values.size()) + " values");
  }
  impl_->shape = shape;
  impl_->values = std::move(values);
  impl_->requires_grad = requires_grad;
}

Tensor::Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}

Tensor make_tensor(std::shared_ptr<TensorImpl> impl) { return Tensor(std::move(impl)); }

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return Tensor(shape, std::vector<double>(shape.size(), 0.0), requires_grad);
}

Tensor Tensor::filled(Shape shape, double value) {
  return Tensor(shape, std::vector<double>(shape.size(), value));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor({1, 1}, {value}, requires_grad);
}

Tensor Tensor::row(std::vector<double> values) {
  const Shape shape{1, values.size()};
  return Tensor(shape, std::move(values));
}

Tensor Tensor::column(std::vector<double> values) {
  const Shape shape{values.size(), 1};
  return Tensor(shape, std::move(values));
}

double Tensor::at(std::size_t r, std::size_t c) const {
  if (r >= rows() || c >= cols()) {
    throw NumError("tensor: index (" + std::to_string(r) + "," + std::to_string(c) +
                   ") out of range for shape " + to_string(shape()));
  }
  return impl_->values[r * cols() + c];
}

double Tensor::item() const {
  if (!impl_->shape.is_scalar()) {
    throw NumError("tensor: item() on non-scalar shape " + to_string(shape()));
  }
  return impl_->values[0];
}

std::optional<std::uint64_t> Tensor::tape_id() const {
  if (impl_->tape_id == 0) return std::nullopt;
  return impl_->tape_id;
}

Tensor Tensor::clone() const {
  return Tensor(impl_->shape, impl_->values, false);
}

}  // namespace adagnn::numcore
