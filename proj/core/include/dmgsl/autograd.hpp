// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dmgsl/tensor.hpp"

namespace dmgsl {

/// A named trainable tensor together with its gradient buffer.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}

  void zero_grad() { grad = Tensor(value.rows(), value.cols()); }
};

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid for the
/// lifetime of the tape that produced it.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  [[nodiscard]] const Tensor& value() const;
  [[nodiscard]] const Tensor& grad() const;
  [[nodiscard]] const Shape& shape() const { return value().shape(); }
  [[nodiscard]] std::size_t rows() const { return value().rows(); }
  [[nodiscard]] std::size_t cols() const { return value().cols(); }
  [[nodiscard]] bool requires_grad() const;
  [[nodiscard]] Tape& tape() const { return *tape_; }
  [[nodiscard]] std::uint32_t id() const { return id_; }

 private:
  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

/// Records primitive operations in execution order and replays them in
/// reverse to compute gradients. Creation order is a topological order, so
/// backward is a single reverse sweep.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::uint32_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Value that never receives gradient.
  Var constant(Tensor value);
  /// Free leaf that receives gradient (readable through Var::grad).
  Var variable(Tensor value);
  /// Leaf bound to a parameter; backward writes into `param.grad`.
  Var parameter(Parameter& param);

  /// Records an op result. `fn` is kept only when some input needs grad.
  Var record(Tensor value, bool requires_grad, BackwardFn fn);

  /// Seeds d(loss)/d(loss) = 1 and sweeps the tape backwards. Gradients of
  /// every parameter bound to this tape are overwritten (not accumulated
  /// across calls), so running backward twice gives identical results.
  void backward(Var loss);

  [[nodiscard]] std::size_t size() const { return nodes_.size(); }
  [[nodiscard]] const Tensor& value(std::uint32_t id) const { return nodes_[id].value; }
  [[nodiscard]] const Tensor& grad(std::uint32_t id) const { return nodes_[id].grad; }
  [[nodiscard]] bool requires_grad(std::uint32_t id) const { return nodes_[id].requires_grad; }

  /// Adds `g` into the gradient of node `id` (allocating on first use).
  /// Used by backward closures.
  void accumulate(std::uint32_t id, const Tensor& g);
  Tensor& grad_buffer(std::uint32_t id);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
    Parameter* param = nullptr;
  };
  std::vector<Node> nodes_;
};

inline const Tensor& Var::value() const { return tape_->value(id_); }
inline const Tensor& Var::grad() const { return tape_->grad(id_); }
inline bool Var::requires_grad() const { return tape_->requires_grad(id_); }

/// Additive mask sentinel for softmax: masked positions get exactly zero
/// probability and zero gradient.
inline constexpr double kMasked = -std::numeric_limits<double>::infinity();

/// Differentiable primitives. Every function validates shapes and throws
/// DimensionError naming the op on mismatch.
namespace ag {

Var matmul(Var a, Var b);
/// a * b^T without materializing the transpose.
Var matmul_nt(Var a, Var b);
Var transpose(Var a);

Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Element-wise (Hadamard) product.
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
/// a (n x k) + b (1 x k) broadcast over rows.
Var add_row(Var a, Var b);
/// diag(v) * a, v is n x 1.
Var scale_rows(Var a, Var v);
/// a * diag(v), v is 1 x k.
Var scale_cols(Var a, Var v);

Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
Var exp(Var a);
/// Throws DomainError on any non-positive entry.
Var log(Var a);
/// Element-wise a^p for strictly positive a.
Var pow(Var a, double p);

Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_rows(Var a, std::size_t begin, std::size_t count);
Var slice_cols(Var a, std::size_t begin, std::size_t count);

/// Sum of all entries, 1x1.
Var sum(Var a);
Var mean(Var a);
/// Per-row sums, n x 1.
Var row_sum(Var a);
/// Column means, 1 x k.
Var col_mean(Var a);
/// Main diagonal of a square matrix, n x 1.
Var diag(Var a);

/// Row-wise softmax. `mask`, when non-empty, has the same shape and holds 0
/// or kMasked; masked entries are excluded from the max and the sum. A row
/// whose entries are all masked throws DomainError.
Var row_softmax(Var a, const Tensor& mask = {});
Var row_log_softmax(Var a);

}  // namespace ag

/// Softmax of a single score vector under an additive {0, -inf} mask.
Tensor masked_softmax(const Tensor& scores, const Tensor& mask);

}  // namespace dmgsl
