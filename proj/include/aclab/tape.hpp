#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "aclab/tensor.hpp"

namespace aclab {

using GradMap = std::map<std::string, Tensor>;

class Tape;

// Lightweight handle to a node on a tape. Vars from different tapes must not
// be mixed; the ops check this.
struct Var {
  Tape* tape = nullptr;
  int id = -1;
};

// Reverse-mode tape. Nodes are appended in execution order, which is a
// topological order by construction, so the backward pass is a single reverse
// sweep that visits each node exactly once. Gradient accumulation over
// fan-out is additive. A tape belongs to one training run; there is no
// internal locking.
class Tape {
 public:
  Var constant(Tensor v);
  Var param(const std::string& name, const Tensor& v);

  const Tensor& value(Var v) const;
  int size() const { return static_cast<int>(nodes_.size()); }

  // Gradients of `loss` (a scalar on this tape) with respect to every
  // registered param. Params not reached by the loss get zero gradients.
  // Calling backward twice returns identical maps; it never accumulates
  // across calls.
  GradMap backward(Var loss);

  // --- internals used by the op implementations ---
  struct Node {
    Tensor value;
    Tensor grad;  // empty until touched by a backward pass
    bool needs_grad = false;
    std::function<void(Tape&, int)> backprop;  // empty for leaves
  };

  int push(Tensor value, bool needs_grad, std::function<void(Tape&, int)> backprop);
  Node& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  bool needs_grad(Var v) const { return node(v.id).needs_grad; }

  // Accumulation target for a node's gradient, allocated as zeros on first use.
  Tensor& grad_buf(int id);

 private:
  std::vector<Node> nodes_;
  std::vector<std::pair<std::string, int>> params_;
};

// --- primitives ---

// Same-size 2D convolution: x[C,H,W] * k[O,C,K,K] + b[O] -> [O,H,W], zero
// padding of (K-1)/2, K odd.
Var conv2d_same(Var x, Var k, Var b);

Var pool_avg2(Var x);          // [C,H,W] -> [C,H/2,W/2]; H,W must be even
Var upsample_nearest2(Var x);  // [C,H,W] -> [C,2H,2W]

Var leaky_relu(Var x, double alpha = 0.2);
Var sigmoid(Var x);
Var tanh_act(Var x);
Var softplus(Var x);  // log(1+e^x), evaluated overflow-free

Var add(Var a, Var b);  // same shape
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var scale(Var a, double c);
Var square(Var a);

Var sum(Var x);   // -> scalar
Var mean(Var x);  // -> scalar

Var concat_ch(Var a, Var b);  // [Ca,H,W] + [Cb,H,W] -> [Ca+Cb,H,W]

Var dense(Var x, Var w, Var b);  // flatten(x)[n], w[m,n], b[m] -> [m]
Var as_scalar(Var x);            // [1] (or any single-element shape) -> scalar

// Squared L2 distance to a fixed target: sum_i (x_i - t_i)^2 -> scalar.
Var sq_norm_to(Var x, const Tensor& target);

// Anchored quadratic: 0.5 * sum_i weight_i * (x_i - center_i)^2 -> scalar.
// weight and center are constants with the same element count as x.
Var quad_penalty(Var x, const Tensor& center, const Tensor& weight);

}  // namespace aclab
