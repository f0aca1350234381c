#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace adagnn::numcore {

/// Raised for any contract violation inside the tensor engine.
class NumError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two-dimensional shape. Scalars are 1x1, vectors are 1xn or nx1.
struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  [[nodiscard]] std::size_t size() const { return rows * cols; }
  [[nodiscard]] bool is_scalar() const { return rows == 1 && cols == 1; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& shape);

/// Storage shared between a Tensor handle and the tape nodes that reference it.
struct TensorImpl {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty until a backward pass touches it
  bool requires_grad = false;
  std::uint64_t tape_id = 0;  // 0 when not produced on a tape
};

/// Dense row-major float64 matrix handle.
///
/// Copies share storage (like a reference-counted buffer); use clone() for a
/// deep, detached copy. A tensor that requires gradients has every op it feeds
/// recorded on the active Tape.
class Tensor {
 public:
  Tensor();
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, double value);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor row(std::vector<double> values);
  static Tensor column(std::vector<double> values);

  [[nodiscard]] Shape shape() const { return impl_->shape; }
  [[nodiscard]] std::size_t rows() const { return impl_->shape.rows; }
  [[nodiscard]] std::size_t cols() const { return impl_->shape.cols; }
  [[nodiscard]] std::size_t size() const { return impl_->values.size(); }

  [[nodiscard]] std::span<const double> values() const { return impl_->values; }
  [[nodiscard]] std::span<double> mutable_values() { return impl_->values; }
  [[nodiscard]] double at(std::size_t r, std::size_t c) const;
  [[nodiscard]] double item() const;

  [[nodiscard]] bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool flag) { impl_->requires_grad = flag; }

  [[nodiscard]] bool has_grad() const { return !impl_->grad.empty(); }
  [[nodiscard]] std::span<const double> grad() const { return impl_->grad; }
  void zero_grad() { impl_->grad.clear(); }

  [[nodiscard]] std::optional<std::uint64_t> tape_id() const;

  /// Deep copy with no gradient and no tape association.
  [[nodiscard]] Tensor clone() const;

  [[nodiscard]] const std::shared_ptr<TensorImpl>& impl() const { return impl_; }

 private:
  explicit Tensor(std::shared_ptr<TensorImpl> impl);
  friend Tensor make_tensor(std::shared_ptr<TensorImpl> impl);

  std::shared_ptr<TensorImpl> impl_;
};

Tensor make_tensor(std::shared_ptr<TensorImpl> impl);

}  // namespace adagnn::numcore
