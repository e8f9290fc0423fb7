// SPDX-License-Identifier: Apache-2.0
#include "dmgsl/autograd.hpp"

#include <algorithm>
#include <cmath>

#include "dmgsl/errors.hpp"

namespace dmgsl {

Var Tape::constant(Tensor value) { return record(std::move(value), false, {}); }

Var Tape::variable(Tensor value) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = true;
  nodes_.push_back(std::move(node));
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::parameter(Parameter& param) {
  Var v = variable(param.value);
  nodes_.back().param = &param;
  return v;
}

Var Tape::record(Tensor value, bool requires_grad, BackwardFn fn) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  if (requires_grad) node.backward = std::move(fn);
  nodes_.push_back(std::move(node));
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Tensor& Tape::grad_buffer(std::uint32_t id) {
  Node& node = nodes_[id];
  if (node.grad.shape() != node.value.shape()) {
    node.grad = Tensor(node.value.rows(), node.value.cols());
  }
  return node.grad;
}

void Tape::accumulate(std::uint32_t id, const Tensor& g) {
  if (!nodes_[id].requires_grad) return;
  Tensor& buf = grad_buffer(id);
  if (buf.shape() != g.shape()) {
    throw DimensionError("backward: gradient shape " + g.shape().str() + " for node of shape " +
                         buf.shape().str());
  }
  for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i];
}

void Tape::backward(Var loss) {
  if (&loss.tape() != this) throw ContractError("backward: loss belongs to a different tape");
  if (loss.value().size() != 1) {
    throw ContractError("backward: loss must be scalar, got shape " + loss.shape().str());
  }
  for (auto& node : nodes_) {
    if (node.requires_grad) node.grad = Tensor(node.value.rows(), node.value.cols());
  }
  if (!nodes_[loss.id()].requires_grad) {
    throw ContractError("backward: loss is not connected to any differentiable input");
  }
  nodes_[loss.id()].grad[0] = 1.0;
  for (std::uint32_t id = loss.id() + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (node.requires_grad && node.backward) node.backward(*this, id);
  }
  for (auto& node : nodes_) {
    if (node.param != nullptr) node.param->zero_grad();
  }
  for (auto& node : nodes_) {
    if (node.param == nullptr) continue;
    Tensor& pg = node.param->grad;
    for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += node.grad[i];
  }
}

namespace ag {
namespace {

Tape& same_tape(Var a, Var b, const char* op) {
  if (&a.tape() != &b.tape()) throw ContractError(std::string(op) + ": operands on different tapes");
  return a.tape();
}

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + a.str() + " and " + b.str());
}

void require_same(const char* op, Var a, Var b) {
  if (a.shape() != b.shape()) shape_error(op, a.shape(), b.shape());
}

template <typename F>
Tensor map(const Tensor& a, F&& f) {
  Tensor out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

// Element-wise unary op whose local derivative is a function of (input, output).
template <typename Fwd, typename Deriv>
Var unary(Var a, Fwd&& fwd, Deriv deriv) {
  Tape& tape = a.tape();
  Tensor out = map(a.value(), fwd);
  const std::uint32_t ia = a.id();
  return tape.record(std::move(out), a.requires_grad(), [ia, deriv](Tape& t, std::uint32_t self) {
    const Tensor& x = t.value(ia);
    const Tensor& y = t.value(self);
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * deriv(x[i], y[i]);
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& tape = same_tape(a, b, "matmul");
  if (a.cols() != b.rows()) shape_error("matmul", a.shape(), b.shape());
  Tensor out;
  kernels::gemm(a.value(), false, b.value(), false, out);
  const auto ia = a.id(), ib = b.id();
  return tape.record(std::move(out), a.requires_grad() || b.requires_grad(),
                     [ia, ib](Tape& t, std::uint32_t self) {
                       const Tensor& g = t.grad(self);
                       if (t.requires_grad(ia)) kernels::gemm(g, false, t.value(ib), true, t.grad_buffer(ia), true);
                       if (t.requires_grad(ib)) kernels::gemm(t.value(ia), true, g, false, t.grad_buffer(ib), true);
                     });
}

Var matmul_nt(Var a, Var b) {
  Tape& tape = same_tape(a, b, "matmul_nt");
  if (a.cols() != b.cols()) shape_error("matmul_nt", a.shape(), b.shape());
  Tensor out;
  kernels::gemm(a.value(), false, b.value(), true, out);
  const auto ia = a.id(), ib = b.id();
  return tape.record(std::move(out), a.requires_grad() || b.requires_grad(),
                     [ia, ib](Tape& t, std::uint32_t self) {
                       const Tensor& g = t.grad(self);
                       // C = A B^T: dA = G B, dB = G^T A
                       if (t.requires_grad(ia)) kernels::gemm(g, false, t.value(ib), false, t.grad_buffer(ia), true);
                       if (t.requires_grad(ib)) kernels::gemm(g, true, t.value(ia), false, t.grad_buffer(ib), true);
                     });
}

Var transpose(Var a) {
  const auto ia = a.id();
  return a.tape().record(a.value().transposed(), a.requires_grad(), [ia](Tape& t, std::uint32_t self) {
    t.accumulate(ia, t.grad(self).transposed());
  });
}

Var add(Var a, Var b) {
  Tape& tape = same_tape(a, b, "add");
  require_same("add", a, b);
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  const auto ia = a.id(), ib = b.id();
  return tape.record(std::move(out), a.requires_grad() || b.requires_grad(),
                     [ia, ib](Tape& t, std::uint32_t self) {
                       t.accumulate(ia, t.grad(self));
                       t.accumulate(ib, t.grad(self));
                     });
}

Var sub(Var a, Var b) {
  Tape& tape = same_tape(a, b, "sub");
  require_same("sub", a, b);
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  const auto ia = a.id(), ib = b.id();
  return tape.record(std::move(out), a.requires_grad() || b.requires_grad(),
                     [ia, ib](Tape& t, std::uint32_t self) {
                       t.accumulate(ia, t.grad(self));
                       if (t.requires_grad(ib)) {
                         const Tensor& g = t.grad(self);
                         Tensor& gb = t.grad_buffer(ib);
                         for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
                       }
                     });
}

Var mul(Var a, Var b) {
  Tape& tape = same_tape(a, b, "mul");
  require_same("mul", a, b);
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  const auto ia = a.id(), ib = b.id();
  return tape.record(std::move(out), a.requires_grad() || b.requires_grad(),
                     [ia, ib](Tape& t, std::uint32_t self) {
                       const Tensor& g = t.grad(self);
                       if (t.requires_grad(ia)) {
                         const Tensor& vb = t.value(ib);
                         Tensor& ga = t.grad_buffer(ia);
                         for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * vb[i];
                       }
                       if (t.requires_grad(ib)) {
                         const Tensor& va = t.value(ia);
                         Tensor& gb = t.grad_buffer(ib);
                         for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * va[i];
                       }
                     });
}

Var scale(Var a, double s) {
  return unary(a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Var add_scalar(Var a, double s) {
  return unary(a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Var add_row(Var a, Var b) {
  Tape& tape = same_tape(a, b, "add_row");
  if (b.rows() != 1 || b.cols() != a.cols()) shape_error("add_row", a.shape(), b.shape());
  Tensor out = a.value();
  const std::size_t cols = a.cols();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) out(r, c) += b.value()[c];
  }
  const auto ia = a.id(), ib = b.id();
  return tape.record(std::move(out), a.requires_grad() || b.requires_grad(),
                     [ia, ib](Tape& t, std::uint32_t self) {
                       const Tensor& g = t.grad(self);
                       t.accumulate(ia, g);
                       if (t.requires_grad(ib)) {
                         Tensor& gb = t.grad_buffer(ib);
                         for (std::size_t r = 0; r < g.rows(); ++r) {
                           for (std::size_t c = 0; c < g.cols(); ++c) gb[c] += g(r, c);
                         }
                       }
                     });
}

Var scale_rows(Var a, Var v) {
  Tape& tape = same_tape(a, v, "scale_rows");
  if (v.cols() != 1 || v.rows() != a.rows()) shape_error("scale_rows", a.shape(), v.shape());
  Tensor out = a.value();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    const double s = v.value()[r];
    for (double& x : out.row_span(r)) x *= s;
  }
  const auto ia = a.id(), iv = v.id();
  return tape.record(std::move(out), a.requires_grad() || v.requires_grad(),
                     [ia, iv](Tape& t, std::uint32_t self) {
                       const Tensor& g = t.grad(self);
                       const Tensor& va = t.value(ia);
                       const Tensor& vv = t.value(iv);
                       if (t.requires_grad(ia)) {
                         Tensor& ga = t.grad_buffer(ia);
                         for (std::size_t r = 0; r < g.rows(); ++r) {
                           for (std::size_t c = 0; c < g.cols(); ++c) ga(r, c) += g(r, c) * vv[r];
                         }
                       }
                       if (t.requires_grad(iv)) {
                         Tensor& gv = t.grad_buffer(iv);
                         for (std::size_t r = 0; r < g.rows(); ++r) {
                           double acc = 0.0;
                           for (std::size_t c = 0; c < g.cols(); ++c) acc += g(r, c) * va(r, c);
                           gv[r] += acc;
                         }
                       }
                     });
}

Var scale_cols(Var a, Var v) {
  Tape& tape = same_tape(a, v, "scale_cols");
  if (v.rows() != 1 || v.cols() != a.cols()) shape_error("scale_cols", a.shape(), v.shape());
  Tensor out = a.value();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) *= v.value()[c];
  }
  const auto ia = a.id(), iv = v.id();
  return tape.record(std::move(out), a.requires_grad() || v.requires_grad(),
                     [ia, iv](Tape& t, std::uint32_t self) {
                       const Tensor& g = t.grad(self);
                       const Tensor& va = t.value(ia);
                       const Tensor& vv = t.value(iv);
                       if (t.requires_grad(ia)) {
                         Tensor& ga = t.grad_buffer(ia);
                         for (std::size_t r = 0; r < g.rows(); ++r) {
                           for (std::size_t c = 0; c < g.cols(); ++c) ga(r, c) += g(r, c) * vv[c];
                         }
                       }
                       if (t.requires_grad(iv)) {
                         Tensor& gv = t.grad_buffer(iv);
                         for (std::size_t r = 0; r < g.rows(); ++r) {
                           for (std::size_t c = 0; c < g.cols(); ++c) gv[c] += g(r, c) * va(r, c);
                         }
                       }
                     });
}

Var sigmoid(Var a) {
  return unary(
      a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var relu(Var a) {
  return unary(a, [](double x) { return x > 0 ? x : 0.0; },
               [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Var exp(Var a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Var a) {
  for (double x : a.value().values()) {
    if (!(x > 0)) throw DomainError("log: non-positive input " + std::to_string(x));
  }
  return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var pow(Var a, double p) {
  for (double x : a.value().values()) {
    if (!(x > 0)) throw DomainError("pow: non-positive input " + std::to_string(x));
  }
  return unary(a, [p](double x) { return std::pow(x, p); },
               [p](double x, double y) { return p * y / x; });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat_cols: no inputs");
  Tape& tape = parts.front().tape();
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  bool needs = false;
  for (const Var& p : parts) {
    if (&p.tape() != &tape) throw ContractError("concat_cols: operands on different tapes");
    if (p.rows() != rows) shape_error("concat_cols", parts.front().shape(), p.shape());
    cols += p.cols();
    needs = needs || p.requires_grad();
  }
  Tensor out(rows, cols);
  std::vector<std::uint32_t> ids;
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy(v.row_span(r).begin(), v.row_span(r).end(), out.row_span(r).begin() + offset);
    }
    offset += p.cols();
    ids.push_back(p.id());
  }
  return tape.record(std::move(out), needs, [ids](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    std::size_t off = 0;
    for (auto id : ids) {
      const std::size_t w = t.value(id).cols();
      if (t.requires_grad(id)) {
        Tensor& gi = t.grad_buffer(id);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          for (std::size_t c = 0; c < w; ++c) gi(r, c) += g(r, off + c);
        }
      }
      off += w;
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat_rows: no inputs");
  Tape& tape = parts.front().tape();
  const std::size_t cols = parts.front().cols();
  std::vector<double> values;
  std::vector<std::uint32_t> ids;
  bool needs = false;
  std::size_t rows = 0;
  for (const Var& p : parts) {
    if (&p.tape() != &tape) throw ContractError("concat_rows: operands on different tapes");
    if (p.cols() != cols) shape_error("concat_rows", parts.front().shape(), p.shape());
    values.insert(values.end(), p.value().values().begin(), p.value().values().end());
    rows += p.rows();
    ids.push_back(p.id());
    needs = needs || p.requires_grad();
  }
  return tape.record(Tensor(rows, cols, std::move(values)), needs, [ids](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    std::size_t off = 0;
    for (auto id : ids) {
      const std::size_t n = t.value(id).size();
      if (t.requires_grad(id)) {
        Tensor& gi = t.grad_buffer(id);
        for (std::size_t i = 0; i < n; ++i) gi[i] += g[off + i];
      }
      off += n;
    }
  });
}

Var slice_rows(Var a, std::size_t begin, std::size_t count) {
  if (begin + count > a.rows()) {
    throw DimensionError("slice_rows: [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") out of range for " + a.shape().str());
  }
  const std::size_t cols = a.cols();
  const auto first = a.value().values().begin() + static_cast<std::ptrdiff_t>(begin * cols);
  Tensor out(count, cols, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(count * cols)));
  const auto ia = a.id();
  return a.tape().record(std::move(out), a.requires_grad(), [ia, begin](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_buffer(ia);
    const std::size_t off = begin * g.cols();
    for (std::size_t i = 0; i < g.size(); ++i) ga[off + i] += g[i];
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
  if (begin + count > a.cols()) {
    throw DimensionError("slice_cols: [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") out of range for " + a.shape().str());
  }
  Tensor out(a.rows(), count);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < count; ++c) out(r, c) = a.value()(r, begin + c);
  }
  const auto ia = a.id();
  return a.tape().record(std::move(out), a.requires_grad(), [ia, begin](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      for (std::size_t c = 0; c < g.cols(); ++c) ga(r, begin + c) += g(r, c);
    }
  });
}

Var sum(Var a) {
  double acc = 0.0;
  for (double x : a.value().values()) acc += x;
  const auto ia = a.id();
  return a.tape().record(Tensor::scalar(acc), a.requires_grad(), [ia](Tape& t, std::uint32_t self) {
    const double g = t.grad(self)[0];
    for (double& x : t.grad_buffer(ia).values()) x += g;
  });
}

Var mean(Var a) {
  if (a.value().empty()) throw DimensionError("mean: empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var row_sum(Var a) {
  Tensor out(a.rows(), 1);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double acc = 0.0;
    for (double x : a.value().row_span(r)) acc += x;
    out[r] = acc;
  }
  const auto ia = a.id();
  return a.tape().record(std::move(out), a.requires_grad(), [ia](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t r = 0; r < ga.rows(); ++r) {
      for (double& x : ga.row_span(r)) x += g[r];
    }
  });
}

Var col_mean(Var a) {
  if (a.rows() == 0) throw DimensionError("col_mean: zero rows");
  const double inv = 1.0 / static_cast<double>(a.rows());
  Tensor out(1, a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) out[c] += a.value()(r, c);
  }
  for (double& x : out.values()) x *= inv;
  const auto ia = a.id();
  return a.tape().record(std::move(out), a.requires_grad(), [ia, inv](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t r = 0; r < ga.rows(); ++r) {
      for (std::size_t c = 0; c < ga.cols(); ++c) ga(r, c) += g[c] * inv;
    }
  });
}

Var diag(Var a) {
  if (a.rows() != a.cols()) shape_error("diag", a.shape(), a.shape());
  Tensor out(a.rows(), 1);
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = a.value()(i, i);
  const auto ia = a.id();
  return a.tape().record(std::move(out), a.requires_grad(), [ia](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga(i, i) += g[i];
  });
}

namespace {

Tensor softmax_rows(const Tensor& x, const Tensor& mask) {
  Tensor out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double hi = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t c = 0; c < x.cols(); ++c) {
      if (!mask.empty() && mask(r, c) == kMasked) continue;
      any = true;
      hi = std::max(hi, x(r, c));
    }
    if (!any) throw DomainError("softmax: row " + std::to_string(r) + " is fully masked");
    double total = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) {
      if (!mask.empty() && mask(r, c) == kMasked) continue;
      const double e = std::exp(x(r, c) + (mask.empty() ? 0.0 : mask(r, c)) - hi);
      out(r, c) = e;
      total += e;
    }
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) /= total;
  }
  return out;
}

}  // namespace

Var row_softmax(Var a, const Tensor& mask) {
  if (!mask.empty()) {
    if (mask.shape() != a.shape()) shape_error("row_softmax(mask)", a.shape(), mask.shape());
    for (double m : mask.values()) {
      if (m != 0.0 && m != kMasked) throw ContractError("row_softmax: mask entries must be 0 or -inf");
    }
  }
  Tensor out = softmax_rows(a.value(), mask);
  const auto ia = a.id();
  return a.tape().record(std::move(out), a.requires_grad(), [ia](Tape& t, std::uint32_t self) {
    // dx = y * (g - <g, y>) row-wise; masked entries have y = 0 and get no gradient.
    const Tensor& y = t.value(self);
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
      for (std::size_t c = 0; c < y.cols(); ++c) ga(r, c) += y(r, c) * (g(r, c) - dot);
    }
  });
}

Var row_log_softmax(Var a) {
  const Tensor& x = a.value();
  Tensor out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : x.row_span(r)) hi = std::max(hi, v);
    double total = 0.0;
    for (double v : x.row_span(r)) total += std::exp(v - hi);
    const double lse = hi + std::log(total);
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = x(r, c) - lse;
  }
  const auto ia = a.id();
  return a.tape().record(std::move(out), a.requires_grad(), [ia](Tape& t, std::uint32_t self) {
    // dx = g - softmax * sum(g) row-wise.
    const Tensor& y = t.value(self);
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double gsum = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) gsum += g(r, c);
      for (std::size_t c = 0; c < y.cols(); ++c) ga(r, c) += g(r, c) - std::exp(y(r, c)) * gsum;
    }
  });
}

}  // namespace ag

Tensor masked_softmax(const Tensor& scores, const Tensor& mask) {
  if (scores.shape() != mask.shape()) {
    throw DimensionError("masked_softmax: scores " + scores.shape().str() + " vs mask " +
                         mask.shape().str());
  }
  Tape tape;
  Tensor row_scores(1, scores.size(), std::vector<double>(scores.values().begin(), scores.values().end()));
  Tensor row_mask(1, mask.size(), std::vector<double>(mask.values().begin(), mask.values().end()));
  Tensor out = ag::row_softmax(tape.constant(std::move(row_scores)), row_mask).value();
  return Tensor(scores.rows(), scores.cols(), std::vector<double>(out.values().begin(), out.values().end()));
}

}  // namespace dmgsl
