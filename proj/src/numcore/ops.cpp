#include "adagnn/numcore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace adagnn::numcore {

namespace {

using ImplPtr = std::shared_ptr<TensorImpl>;

[[noreturn]] void shape_error(OpKind kind, const Shape& a, const Shape& b) {
  throw NumError(std::string(op_name(kind)) + ": shape mismatch " + to_string(a) + " vs " +
                 to_string(b));
}

std::vector<double>& grad_of(const ImplPtr& t) {
  if (t->grad.empty()) t->grad.assign(t->values.size(), 0.0);
  return t->grad;
}

ImplPtr new_output(Shape shape, std::vector<double> values) {
  auto out = std::make_shared<TensorImpl>();
  out->shape = shape;
  out->values = std::move(values);
  return out;
}

// Records when a tape is active and some input requires gradients. The
// backward callback receives the output and the input list.
template <typename Backward>
Tensor finish(OpKind kind, std::vector<ImplPtr> inputs, ImplPtr out, Backward&& bw) {
  Tape* tape = active_tape();
  const bool needs = std::ranges::any_of(inputs, [](const ImplPtr& p) { return p->requires_grad; });
  if (tape != nullptr && needs) {
    out->requires_grad = true;
    Tape::Node node{kind, inputs, out, {}};
    node.backward = [out, inputs, bw = std::forward<Backward>(bw)]() { bw(*out, inputs); };
    tape->record(std::move(node));
  }
  return make_tensor(std::move(out));
}

template <typename F, typename DF>
Tensor unary(OpKind kind, const Tensor& x, F f, DF df) {
  const auto& in = x.impl();
  std::vector<double> values(in->values.size());
  std::ranges::transform(in->values, values.begin(), f);
  auto out = new_output(in->shape, std::move(values));
  // df(input value, output value) -> local derivative
  return finish(kind, {in}, out, [df](const TensorImpl& o, const std::vector<ImplPtr>& ins) {
    const auto& src = ins[0];
    if (!src->requires_grad) return;
    auto& g = grad_of(src);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * df(src->values[i], o.values[i]);
  });
}

void check_offsets(OpKind kind, const Shape& shape, std::span<const std::size_t> offsets) {
  if (offsets.empty() || offsets.front() != 0 || offsets.back() != shape.rows) {
    throw NumError(std::string(op_name(kind)) + ": segment offsets must run from 0 to " +
                   std::to_string(shape.rows));
  }
  for (std::size_t s = 1; s < offsets.size(); ++s) {
    if (offsets[s] < offsets[s - 1]) {
      throw NumError(std::string(op_name(kind)) + ": segment offsets must be non-decreasing");
    }
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  const Shape sa = a.shape();
  const Shape sb = b.shape();
  if (sa.cols != sb.rows) shape_error(OpKind::matmul, sa, sb);
  const std::size_t m = sa.rows, k = sa.cols, n = sb.cols;
  std::vector<double> c(m * n, 0.0);
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = bv.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
  auto out = new_output({m, n}, std::move(c));
  return finish(OpKind::matmul, {a.impl(), b.impl()}, out,
                [m, k, n](const TensorImpl& o, const std::vector<ImplPtr>& ins) {
                  const auto& A = ins[0];
                  const auto& B = ins[1];
                  if (A->requires_grad) {
                    auto& ga = grad_of(A);
                    // dA = dC B^T, accumulated row by row against B^T so the inner loop is a saxpy.
                    std::vector<double> bt(k * n);
                    for (std::size_t p = 0; p < k; ++p)
                      for (std::size_t j = 0; j < n; ++j) bt[j * k + p] = B->values[p * n + j];
                    for (std::size_t i = 0; i < m; ++i) {
                      const double* grow = o.grad.data() + i * n;
                      double* garow = ga.data() + i * k;
                      for (std::size_t j = 0; j < n; ++j) {
                        const double g = grow[j];
                        if (g == 0.0) continue;
                        const double* btrow = bt.data() + j * k;
                        for (std::size_t p = 0; p < k; ++p) garow[p] += g * btrow[p];
                      }
                    }
                  }
                  if (B->requires_grad) {
                    auto& gb = grad_of(B);
                    for (std::size_t i = 0; i < m; ++i) {
                      const double* grow = o.grad.data() + i * n;
                      for (std::size_t p = 0; p < k; ++p) {
                        const double aip = A->values[i * k + p];
                        if (aip == 0.0) continue;
                        double* gbrow = gb.data() + p * n;
                        for (std::size_t j = 0; j < n; ++j) gbrow[j] += aip * grow[j];
                      }
                    }
                  }
                });
}

Tensor add(const Tensor& a, const Tensor& b) {
  const Shape sa = a.shape();
  const Shape sb = b.shape();
  const bool same = sa == sb;
  const bool row_broadcast = sb.rows == 1 && sb.cols == sa.cols && sa.rows != 1;
  if (!same && !row_broadcast) shape_error(OpKind::add, sa, sb);
  std::vector<double> c(a.values().begin(), a.values().end());
  const auto bv = b.values();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += bv[same ? i : i % sa.cols];
  auto out = new_output(sa, std::move(c));
  return finish(OpKind::add, {a.impl(), b.impl()}, out,
                [same, cols = sa.cols](const TensorImpl& o, const std::vector<ImplPtr>& ins) {
                  if (ins[0]->requires_grad) {
                    auto& ga = grad_of(ins[0]);
                    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += o.grad[i];
                  }
                  if (ins[1]->requires_grad) {
                    auto& gb = grad_of(ins[1]);
                    for (std::size_t i = 0; i < o.grad.size(); ++i) gb[same ? i : i % cols] += o.grad[i];
                  }
                });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  const Shape sa = a.shape();
  const Shape sb = b.shape();
  const bool same = sa == sb;
  const bool col_broadcast = sb.cols == 1 && sb.rows == sa.rows && sa.cols != 1;
  if (!same && !col_broadcast) shape_error(OpKind::elementwise_mul, sa, sb);
  const std::size_t cols = sa.cols;
  auto idx_b = [same, cols](std::size_t i) { return same ? i : i / cols; };
  std::vector<double> c(a.values().begin(), a.values().end());
  const auto bv = b.values();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= bv[idx_b(i)];
  auto out = new_output(sa, std::move(c));
  return finish(OpKind::elementwise_mul, {a.impl(), b.impl()}, out,
                [idx_b](const TensorImpl& o, const std::vector<ImplPtr>& ins) {
                  const auto& A = ins[0];
                  const auto& B = ins[1];
                  if (A->requires_grad) {
                    auto& ga = grad_of(A);
                    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += o.grad[i] * B->values[idx_b(i)];
                  }
                  if (B->requires_grad) {
                    auto& gb = grad_of(B);
                    for (std::size_t i = 0; i < o.grad.size(); ++i) gb[idx_b(i)] += o.grad[i] * A->values[i];
                  }
                });
}

Tensor concat_columns(std::span<const Tensor> parts) {
  if (parts.empty()) throw NumError("concat_columns: no inputs");
  const std::size_t rows = parts[0].rows();
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) shape_error(OpKind::concat_columns, parts[0].shape(), p.shape());
    total += p.cols();
  }
  std::vector<double> c(rows * total);
  std::size_t offset = 0;
  std::vector<std::size_t> offsets;
  std::vector<ImplPtr> ins;
  for (const auto& p : parts) {
    const auto pv = p.values();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(pv.begin() + static_cast<std::ptrdiff_t>(r * p.cols()), p.cols(),
                  c.begin() + static_cast<std::ptrdiff_t>(r * total + offset));
    }
    offsets.push_back(offset);
    offset += p.cols();
    ins.push_back(p.impl());
  }
  auto out = new_output({rows, total}, std::move(c));
  return finish(OpKind::concat_columns, std::move(ins), out,
                [offsets, rows, total](const TensorImpl& o, const std::vector<ImplPtr>& in) {
                  for (std::size_t k = 0; k < in.size(); ++k) {
                    if (!in[k]->requires_grad) continue;
                    auto& g = grad_of(in[k]);
                    const std::size_t w = in[k]->shape.cols;
                    for (std::size_t r = 0; r < rows; ++r) {
                      for (std::size_t j = 0; j < w; ++j) g[r * w + j] += o.grad[r * total + offsets[k] + j];
                    }
                  }
                });
}

Tensor concat_columns(const Tensor& a, const Tensor& b) {
  const Tensor parts[] = {a, b};
  return concat_columns(std::span<const Tensor>(parts));
}

Tensor reduce_sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  auto out = new_output({1, 1}, {s});
  return finish(OpKind::reduce_sum, {x.impl()}, out,
                [](const TensorImpl& o, const std::vector<ImplPtr>& ins) {
                  if (!ins[0]->requires_grad) return;
                  auto& g = grad_of(ins[0]);
                  for (double& v : g) v += o.grad[0];
                });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      OpKind::sigmoid, x,
      [](double v) {
        if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor exp(const Tensor& x) {
  return unary(OpKind::exp, x, [](double v) { return std::exp(v); },
               [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  for (double v : x.values()) {
    if (!(v > 0.0)) {
      throw NumError("log: non-positive input " + std::to_string(v) +
                     " (use log_clamped for probabilities)");
    }
  }
  return unary(OpKind::log, x, [](double v) { return std::log(v); },
               [](double v, double) { return 1.0 / v; });
}

Tensor log_clamped(const Tensor& x, double lo, double hi) {
  return unary(
      OpKind::log_clamped, x, [lo, hi](double v) { return std::log(std::clamp(v, lo, hi)); },
      [lo, hi](double v, double) { return (v < lo || v > hi) ? 0.0 : 1.0 / v; });
}

Tensor leaky_relu(const Tensor& x, double slope) {
  return unary(
      OpKind::leaky_relu, x, [slope](double v) { return v > 0 ? v : slope * v; },
      [slope](double v, double) { return v > 0 ? 1.0 : slope; });
}

Tensor affine(const Tensor& x, double scale, double shift) {
  return unary(OpKind::affine, x, [scale, shift](double v) { return scale * v + shift; },
               [scale](double, double) { return scale; });
}

Tensor softmax_rows(const Tensor& x) {
  const std::size_t rows = x.rows(), cols = x.cols();
  if (cols == 0) throw NumError("softmax_rows: zero columns in shape " + to_string(x.shape()));
  std::vector<double> y(rows * cols);
  const auto xv = x.values();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = xv.data() + r * cols;
    double* out = y.data() + r * cols;
    const double mx = *std::max_element(in, in + cols);
    double z = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      out[j] = std::exp(in[j] - mx);
      z += out[j];
    }
    for (std::size_t j = 0; j < cols; ++j) out[j] /= z;
  }
  auto out = new_output(x.shape(), std::move(y));
  return finish(OpKind::softmax_rows, {x.impl()}, out,
                [rows, cols](const TensorImpl& o, const std::vector<ImplPtr>& ins) {
                  if (!ins[0]->requires_grad) return;
                  auto& g = grad_of(ins[0]);
                  for (std::size_t r = 0; r < rows; ++r) {
                    const double* yv = o.values.data() + r * cols;
                    const double* gy = o.grad.data() + r * cols;
                    double dot = 0.0;
                    for (std::size_t j = 0; j < cols; ++j) dot += gy[j] * yv[j];
                    for (std::size_t j = 0; j < cols; ++j) g[r * cols + j] += yv[j] * (gy[j] - dot);
                  }
                });
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> index) {
  const std::size_t cols = x.cols();
  std::vector<double> y(index.size() * cols);
  const auto xv = x.values();
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= x.rows()) {
      throw NumError("gather_rows: index " + std::to_string(index[i]) + " out of range for shape " +
                     to_string(x.shape()));
    }
    std::copy_n(xv.begin() + static_cast<std::ptrdiff_t>(index[i] * cols), cols,
                y.begin() + static_cast<std::ptrdiff_t>(i * cols));
  }
  auto out = new_output({index.size(), cols}, std::move(y));
  return finish(OpKind::gather_rows, {x.impl()}, out,
                [idx = std::vector<std::size_t>(index.begin(), index.end()), cols](
                    const TensorImpl& o, const std::vector<ImplPtr>& ins) {
                  if (!ins[0]->requires_grad) return;
                  auto& g = grad_of(ins[0]);
                  for (std::size_t i = 0; i < idx.size(); ++i) {
                    for (std::size_t j = 0; j < cols; ++j) g[idx[i] * cols + j] += o.grad[i * cols + j];
                  }
                });
}

namespace {

Tensor segment_reduce(OpKind kind, const Tensor& x, std::span<const std::size_t> offsets, bool mean) {
  check_offsets(kind, x.shape(), offsets);
  const std::size_t segs = offsets.size() - 1;
  const std::size_t cols = x.cols();
  std::vector<double> y(segs * cols, 0.0);
  const auto xv = x.values();
  std::vector<double> scale(segs, 1.0);
  for (std::size_t s = 0; s < segs; ++s) {
    const std::size_t len = offsets[s + 1] - offsets[s];
    if (mean && len > 0) scale[s] = 1.0 / static_cast<double>(len);
    for (std::size_t r = offsets[s]; r < offsets[s + 1]; ++r) {
      for (std::size_t j = 0; j < cols; ++j) y[s * cols + j] += xv[r * cols + j];
    }
    for (std::size_t j = 0; j < cols; ++j) y[s * cols + j] *= scale[s];
  }
  auto out = new_output({segs, cols}, std::move(y));
  return finish(kind, {x.impl()}, out,
                [off = std::vector<std::size_t>(offsets.begin(), offsets.end()), scale, cols](
                    const TensorImpl& o, const std::vector<ImplPtr>& ins) {
                  if (!ins[0]->requires_grad) return;
                  auto& g = grad_of(ins[0]);
                  for (std::size_t s = 0; s + 1 < off.size(); ++s) {
                    for (std::size_t r = off[s]; r < off[s + 1]; ++r) {
                      for (std::size_t j = 0; j < cols; ++j) g[r * cols + j] += o.grad[s * cols + j] * scale[s];
                    }
                  }
                });
}

}  // namespace

Tensor segment_sum(const Tensor& x, std::span<const std::size_t> offsets) {
  return segment_reduce(OpKind::segment_sum, x, offsets, false);
}

Tensor segment_mean(const Tensor& x, std::span<const std::size_t> offsets) {
  return segment_reduce(OpKind::segment_mean, x, offsets, true);
}

Tensor row_mean(const Tensor& x) {
  if (x.rows() == 0) throw NumError("row_mean: empty input");
  const std::size_t offsets[] = {0, x.rows()};
  return segment_reduce(OpKind::row_mean, x, offsets, true);
}

Tensor segment_softmax(const Tensor& scores, std::span<const std::size_t> offsets) {
  if (scores.cols() != 1) shape_error(OpKind::segment_softmax, scores.shape(), {scores.rows(), 1});
  check_offsets(OpKind::segment_softmax, scores.shape(), offsets);
  const auto sv = scores.values();
  std::vector<double> y(sv.size());
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
    const std::size_t b = offsets[s], e = offsets[s + 1];
    if (b == e) continue;
    const double mx = *std::max_element(sv.begin() + static_cast<std::ptrdiff_t>(b),
                                        sv.begin() + static_cast<std::ptrdiff_t>(e));
    double z = 0.0;
    for (std::size_t r = b; r < e; ++r) {
      y[r] = std::exp(sv[r] - mx);
      z += y[r];
    }
    for (std::size_t r = b; r < e; ++r) y[r] /= z;
  }
  auto out = new_output(scores.shape(), std::move(y));
  return finish(OpKind::segment_softmax, {scores.impl()}, out,
                [off = std::vector<std::size_t>(offsets.begin(), offsets.end())](
                    const TensorImpl& o, const std::vector<ImplPtr>& ins) {
                  if (!ins[0]->requires_grad) return;
                  auto& g = grad_of(ins[0]);
                  for (std::size_t s = 0; s + 1 < off.size(); ++s) {
                    double dot = 0.0;
                    for (std::size_t r = off[s]; r < off[s + 1]; ++r) dot += o.grad[r] * o.values[r];
                    for (std::size_t r = off[s]; r < off[s + 1]; ++r) g[r] += o.values[r] * (o.grad[r] - dot);
                  }
                });
}

Tensor forward_op(OpKind kind, std::span<const Tensor> inputs) {
  auto need = [&](std::size_t n) {
    if (inputs.size() != n) {
      throw NumError(std::string(op_name(kind)) + ": expected " + std::to_string(n) + " inputs, got " +
                     std::to_string(inputs.size()));
    }
  };
  switch (kind) {
    case OpKind::matmul: need(2); return matmul(inputs[0], inputs[1]);
    case OpKind::add: need(2); return add(inputs[0], inputs[1]);
    case OpKind::elementwise_mul: need(2); return mul(inputs[0], inputs[1]);
    case OpKind::concat_columns: return concat_columns(inputs);
    case OpKind::row_mean: need(1); return row_mean(inputs[0]);
    case OpKind::reduce_sum: need(1); return reduce_sum(inputs[0]);
    case OpKind::sigmoid: need(1); return sigmoid(inputs[0]);
    case OpKind::exp: need(1); return exp(inputs[0]);
    case OpKind::log: need(1); return log(inputs[0]);
    case OpKind::leaky_relu: need(1); return leaky_relu(inputs[0]);
    case OpKind::softmax_rows: need(1); return softmax_rows(inputs[0]);
    default:
      throw NumError(std::string("forward_op: ") + op_name(kind) + " needs extra arguments; call it directly");
  }
}

}  // namespace adagnn::numcore
