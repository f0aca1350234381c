#include "adagnn/numcore/tape.hpp"

#include <atomic>
#include <ranges>

namespace adagnn::numcore {

namespace {

std::atomic<std::uint64_t> g_next_tape_id{1};
thread_local Tape* t_active_tape = nullptr;

}  // namespace

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::matmul: return "matmul";
    case OpKind::add: return "add";
    case OpKind::elementwise_mul: return "elementwise_mul";
    case OpKind::concat_columns: return "concat_columns";
    case OpKind::row_mean: return "row_mean";
    case OpKind::reduce_sum: return "reduce_sum";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::exp: return "exp";
    case OpKind::log: return "log";
    case OpKind::leaky_relu: return "leaky_relu";
    case OpKind::softmax_rows: return "softmax_rows";
    case OpKind::gather_rows: return "gather_rows";
    case OpKind::segment_sum: return "segment_sum";
    case OpKind::segment_mean: return "segment_mean";
    case OpKind::segment_softmax: return "segment_softmax";
    case OpKind::affine: return "affine";
    case OpKind::log_clamped: return "log_clamped";
  }
  return "unknown";
}

Tape::Tape() : id_(g_next_tape_id.fetch_add(1)) {}

void Tape::record(Node node) {
  if (consumed_) throw NumError("tape: cannot record on a consumed tape");
  node.output->tape_id = id_;
  nodes_.push_back(std::move(node));
}

TapeScope::TapeScope(Tape& tape) : previous_(t_active_tape) { t_active_tape = &tape; }

TapeScope::~TapeScope() { t_active_tape = previous_; }

Tape* active_tape() { return t_active_tape; }

void backward(const Tensor& output, Tape& tape) {
  if (tape.consumed_) throw NumError("backward: tape already consumed");
  if (!output.shape().is_scalar()) {
    throw NumError("backward: output must be scalar, got shape " + to_string(output.shape()));
  }
  const auto& out = output.impl();
  if (out->tape_id != tape.id()) {
    throw NumError("backward: output was not produced on this tape");
  }
  out->grad.assign(1, 1.0);
  for (auto& node : std::views::reverse(tape.nodes_)) {
    if (node.output->grad.empty()) continue;
    node.backward();
  }
  tape.consumed_ = true;
  // Closures hold intermediate buffers; release them now.
  tape.nodes_.clear();
}

}  // namespace adagnn::numcore
