#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "adagnn/numcore/tensor.hpp"

namespace adagnn::numcore {

enum class OpKind {
  matmul,
  add,
  elementwise_mul,
  concat_columns,
  row_mean,
  reduce_sum,
  sigmoid,
  exp,
  log,
  leaky_relu,
  softmax_rows,
  // Extensions used by the batched encoders and losses.
  gather_rows,
  segment_sum,
  segment_mean,
  segment_softmax,
  affine,
  log_clamped,
};

const char* op_name(OpKind kind);

/// Append-only record of differentiable operations.
///
/// Nodes are appended in execution order, so the list is topologically sorted.
/// A tape can be consumed by exactly one backward pass.
class Tape {
 public:
  struct Node {
    OpKind kind;
    std::vector<std::shared_ptr<TensorImpl>> inputs;
    std::shared_ptr<TensorImpl> output;
    // Reads output->grad and accumulates into the inputs that require grad.
    std::function<void()> backward;
  };

  Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  [[nodiscard]] std::uint64_t id() const { return id_; }
  [[nodiscard]] std::size_t size() const { return nodes_.size(); }
  [[nodiscard]] bool consumed() const { return consumed_; }
  [[nodiscard]] const std::vector<Node>& nodes() const { return nodes_; }

  void record(Node node);

 private:
  friend void backward(const Tensor& output, Tape& tape);

  std::uint64_t id_;
  std::vector<Node> nodes_;
  bool consumed_ = false;
};

/// Makes a tape the active recording target for the current thread.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

/// Tape receiving ops on this thread, or nullptr.
Tape* active_tape();

/// Reverse pass from a scalar output. Populates grad on every tensor that
/// requires gradients and is reachable from output; consumes the tape.
void backward(const Tensor& output, Tape& tape);

}  // namespace adagnn::numcore
