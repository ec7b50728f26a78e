#include "aclab/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "aclab/kernels.hpp"

namespace aclab {

namespace {

void check_same_tape(Var a, Var b) {
  if (a.tape != b.tape) throw std::invalid_argument("tape op: operands live on different tapes");
}

void check_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.shape.size() != rank)
    throw std::invalid_argument(std::string(what) + ": expected rank " + std::to_string(rank) +
                                ", got " + shape_str(t.shape));
}

}  // namespace

Var Tape::constant(Tensor v) {
  const int id = push(std::move(v), false, {});
  return Var{this, id};
}

Var Tape::param(const std::string& name, const Tensor& v) {
  const int id = push(v, true, {});
  params_.emplace_back(name, id);
  return Var{this, id};
}

int Tape::push(Tensor value, bool needs_grad, std::function<void(Tape&, int)> backprop) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

const Tensor& Tape::value(Var v) const {
  if (v.tape != this || v.id < 0 || v.id >= size())
    throw std::invalid_argument("Tape::value: var does not belong to this tape");
  return node(v.id).value;
}

Tensor& Tape::grad_buf(int id) {
  Node& n = node(id);
  if (n.grad.data.empty()) n.grad = Tensor::zeros(n.value.shape);
  return n.grad;
}

GradMap Tape::backward(Var loss) {
  if (loss.tape != this || loss.id < 0 || loss.id >= size())
    throw std::invalid_argument("backward: loss var does not belong to this tape");
  if (!node(loss.id).value.is_scalar())
    throw std::invalid_argument("backward: loss must be a scalar, got shape " +
                                shape_str(node(loss.id).value.shape));

  for (auto& n : nodes_) n.grad = Tensor();
  grad_buf(loss.id).data[0] = 1.0;

  for (int id = loss.id; id >= 0; --id) {
    Node& n = node(id);
    if (!n.needs_grad && id != loss.id) continue;
    if (n.grad.data.empty()) continue;  // not on any path from the loss
    if (n.backprop) n.backprop(*this, id);
  }

  GradMap out;
  for (const auto& [name, pid] : params_) {
    const Node& n = node(pid);
    if (n.grad.data.empty()) out.emplace(name, Tensor::zeros(n.value.shape));
    else out.emplace(name, n.grad);
  }
  return out;
}

// ------------------------------------------------------------------- ops --

Var conv2d_same(Var x, Var k, Var b) {
  check_same_tape(x, k);
  check_same_tape(x, b);
  Tape& t = *x.tape;
  const Tensor& xv = t.value(x);
  const Tensor& kv = t.value(k);
  const Tensor& bv = t.value(b);
  check_rank(xv, 3, "conv2d_same input");
  check_rank(kv, 4, "conv2d_same kernels");
  check_rank(bv, 1, "conv2d_same bias");
  if (kv.shape[2] != kv.shape[3])
    throw std::invalid_argument("conv2d_same: kernel window must be square, got " + shape_str(kv.shape));
  if (kv.shape[2] % 2 == 0)
    throw std::invalid_argument("conv2d_same: kernel size must be odd, got k=" + std::to_string(kv.shape[2]));
  if (kv.shape[1] != xv.shape[0])
    throw std::invalid_argument("conv2d_same: kernel input-channel dim is " + std::to_string(kv.shape[1]) +
                                " but input has " + std::to_string(xv.shape[0]) + " channels");
  if (bv.shape[0] != kv.shape[0])
    throw std::invalid_argument("conv2d_same: bias dim is " + std::to_string(bv.shape[0]) +
                                " but kernels produce " + std::to_string(kv.shape[0]) + " channels");

  const kernels::Conv2dDims d{xv.shape[0], xv.shape[1], xv.shape[2], kv.shape[0], kv.shape[2]};
  Tensor out = Tensor::zeros({d.out_ch, d.height, d.width});
  kernels::conv2d_fwd(xv.data.data(), kv.data.data(), bv.data.data(), out.data.data(), d);

  const bool ng = t.needs_grad(x) || t.needs_grad(k) || t.needs_grad(b);
  const int xid = x.id, kid = k.id, bid = b.id;
  auto bp = [xid, kid, bid, d](Tape& tp, int self) {
    const Tensor& g = tp.node(self).grad;
    if (tp.node(xid).needs_grad)
      kernels::conv2d_bwd_input(g.data.data(), tp.node(kid).value.data.data(),
                                tp.grad_buf(xid).data.data(), d);
    if (tp.node(kid).needs_grad)
      kernels::conv2d_bwd_kernel(g.data.data(), tp.node(xid).value.data.data(),
                                 tp.grad_buf(kid).data.data(), d);
    if (tp.node(bid).needs_grad) kernels::conv2d_bwd_bias(g.data.data(), tp.grad_buf(bid).data.data(), d);
  };
  return Var{&t, t.push(std::move(out), ng, ng ? std::function<void(Tape&, int)>(bp) : nullptr)};
}

Var pool_avg2(Var x) {
  Tape& t = *x.tape;
  const Tensor& xv = t.value(x);
  check_rank(xv, 3, "pool_avg2 input");
  if (xv.shape[1] % 2 != 0 || xv.shape[2] % 2 != 0)
    throw std::invalid_argument("pool_avg2: spatial dims must be even, got " + shape_str(xv.shape));
  const kernels::ImageDims d{xv.shape[0], xv.shape[1], xv.shape[2]};
  Tensor out = Tensor::zeros({d.channels, d.height / 2, d.width / 2});
  kernels::pool_avg2_fwd(xv.data.data(), out.data.data(), d);

  const bool ng = t.needs_grad(x);
  const int xid = x.id;
  auto bp = [xid, d](Tape& tp, int self) {
    kernels::pool_avg2_bwd(tp.node(self).grad.data.data(), tp.grad_buf(xid).data.data(), d);
  };
  return Var{&t, t.push(std::move(out), ng, ng ? std::function<void(Tape&, int)>(bp) : nullptr)};
}

Var upsample_nearest2(Var x) {
  Tape& t = *x.tape;
  const Tensor& xv = t.value(x);
  check_rank(xv, 3, "upsample_nearest2 input");
  const kernels::ImageDims d{xv.shape[0], xv.shape[1], xv.shape[2]};
  Tensor out = Tensor::zeros({d.channels, 2 * d.height, 2 * d.width});
  kernels::upsample2_fwd(xv.data.data(), out.data.data(), d);

  const bool ng = t.needs_grad(x);
  const int xid = x.id;
  auto bp = [xid, d](Tape& tp, int self) {
    kernels::upsample2_bwd(tp.node(self).grad.data.data(), tp.grad_buf(xid).data.data(), d);
  };
  return Var{&t, t.push(std::move(out), ng, ng ? std::function<void(Tape&, int)>(bp) : nullptr)};
}

Var leaky_relu(Var x, double alpha) {
  Tape& t = *x.tape;
  const Tensor& xv = t.value(x);
  Tensor out = xv;
  for (auto& v : out.data) v = v >= 0.0 ? v : alpha * v;
  const bool ng = t.needs_grad(x);
  const int xid = x.id;
  auto bp = [xid, alpha](Tape& tp, int self) {
    const Tensor& g = tp.node(self).grad;
    const Tensor& in = tp.node(xid).value;
    Tensor& dx = tp.grad_buf(xid);
    for (std::size_t i = 0; i < g.data.size(); ++i)
      dx.data[i] += g.data[i] * (in.data[i] >= 0.0 ? 1.0 : alpha);
  };
  return Var{&t, t.push(std::move(out), ng, ng ? std::function<void(Tape&, int)>(bp) : nullptr)};
}

Var sigmoid(Var x) {
  Tape& t = *x.tape;
  Tensor out = t.value(x);
  for (auto& v : out.data) {
    // Evaluate without overflow for large |v|.
    if (v >= 0.0) v = 1.0 / (1.0 + std::exp(-v));
    else {
      const double e = std::exp(v);
      v = e / (1.0 + e);
    }
  }
  const bool ng = t.needs_grad(x);
  const int xid = x.id;
  auto bp = [xid](Tape& tp, int self) {
    const Tensor& g = tp.node(self).grad;
    const Tensor& s = tp.node(self).value;
    Tensor& dx = tp.grad_buf(xid);
    for (std::size_t i = 0; i < g.data.size(); ++i)
      dx.data[i] += g.data[i] * s.data[i] * (1.0 - s.data[i]);
  };
  return Var{&t, t.push(std::move(out), ng, ng ? std::function<void(Tape&, int)>(bp) : nullptr)};
}

Var tanh_act(Var x) {
  Tape& t = *x.tape;
  Tensor out = t.value(x);
  for (auto& v : out.data) v = std::tanh(v);
  const bool ng = t.needs_grad(x);
  const int xid = x.id;
  auto bp = [xid](Tape& tp, int self) {
    const Tensor& g = tp.node(self).grad;
    const Tensor& y = tp.node(self).value;
    Tensor& dx = tp.grad_buf(xid);
    for (std::size_t i = 0; i < g.data.size(); ++i)
      dx.data[i] += g.data[i] * (1.0 - y.data[i] * y.data[i]);
  };
  return Var{&t, t.push(std::move(out), ng, ng ? std::function<void(Tape&, int)>(bp) : nullptr)};
}

Var softplus(Var x) {
  Tape& t = *x.tape;
  Tensor out = t.value(x);
  for (auto& v : out.data) {
    const double m = v > 0.0 ? v : 0.0;
    v = m + std::log1p(std::exp(v > 0.0 ? -v : v));
  }
  const bool ng = t.needs_grad(x);
  const int xid = x.id;
  auto bp = [xid](Tape& tp, int self) {
    const Tensor& g = tp.node(self).grad;
    const Tensor& in = tp.node(xid).value;
    Tensor& dx = tp.grad_buf(xid);
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      const double v = in.data[i];
      double s;
      if (v >= 0.0) s = 1.0 / (1.0 + std::exp(-v));
      else {
        const double e = std::exp(v);
        s = e / (1.0 + e);
      }
      dx.data[i] += g.data[i] * s;
    }
  };
  return Var{&t, t.push(std::move(out), ng, ng ? std::function<void(Tape&, int)>(bp) : nullptr)};
}

Var add(Var a, Var b) {
  check_same_tape(a, b);
  Tape& t = *a.tape;
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  if (!av.same_shape(bv))
    throw std::invalid_argument("add: shape mismatch " + shape_str(av.shape) + " vs " + shape_str(bv.shape));
  Tensor out = av;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += bv.data[i];
  const bool ng = t.needs_grad(a) || t.needs_grad(b);
  const int aid = a.id, bid = b.id;
  auto bp = [aid, bid](Tape& tp, int self) {
    const Tensor& g = tp.node(self).grad;
    if (tp.node(aid).needs_grad) {
      Tensor& da = tp.grad_buf(aid);
      for (std::size_t i = 0; i < g.data.size(); ++i) da.data[i] += g.data[i];
    }
    if (tp.node(bid).needs_grad) {
      Tensor& db = tp.grad_buf(bid);
      for (std::size_t i = 0; i < g.data.size(); ++i) db.data[i] += g.data[i];
    }
  };
  return Var{&t, t.push(std::move(out), ng, ng ? std::function<void(Tape&, int)>(bp) : nullptr)};
}

Var sub(Var a, Var b) {
  check_same_tape(a, b);
  Tape& t = *a.tape;
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  if (!av.same_shape(bv))
    throw std::invalid_argument("sub: shape mismatch " + shape_str(av.shape) + " vs " + shape_str(bv.shape));
  Tensor out = av;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= bv.data[i];
  const bool ng = t.needs_grad(a) || t.needs_grad(b);
  const int aid = a.id, bid = b.id;
  auto bp = [aid, bid](Tape& tp, int self) {
    const Tensor& g = tp.node(self).grad;
    if (tp.node(aid).needs_grad) {
      Tensor& da = tp.grad_buf(aid);
      for (std::size_t i = 0; i < g.data.size(); ++i) da.data[i] += g.data[i];
    }
    if (tp.node(bid).needs_grad) {
      Tensor& db = tp.grad_buf(bid);
      for (std::size_t i = 0; i < g.data.size(); ++i) db.data[i] -= g.data[i];
    }
  };
  return Var{&t, t.push(std::move(out), ng, ng ? std::function<void(Tape&, int)>(bp) : nullptr)};
}

Var mul(Var a, Var b) {
  check_same_tape(a, b);
  Tape& t = *a.tape;
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  if (!av.same_shape(bv))
    throw std::invalid_argument("mul: shape mismatch " + shape_str(av.shape) + " vs " + shape_str(bv.shape));
  Tensor out = av;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= bv.data[i];
  const bool ng = t.needs_grad(a) || t.needs_grad(b);
  const int aid = a.id, bid = b.id;
  auto bp = [aid, bid](Tape& tp, int self) {
    const Tensor& g = tp.node(self).grad;
    const Tensor& av2 = tp.node(aid).value;
    const Tensor& bv2 = tp.node(bid).value;
    if (tp.node(aid).needs_grad) {
      Tensor& da = tp.grad_buf(aid);
      for (std::size_t i = 0; i < g.data.size(); ++i) da.data[i] += g.data[i] * bv2.data[i];
    }
    if (tp.node(bid).needs_grad) {
      Tensor& db = tp.grad_buf(bid);
      for (std::size_t i = 0; i < g.data.size(); ++i) db.data[i] += g.data[i] * av2.data[i];
    }
  };
  return Var{&t, t.push(std::move(out), ng, ng ? std::function<void(Tape&, int)>(bp) : nullptr)};
}

Var scale(Var a, double c) {
  Tape& t = *a.tape;
  Tensor out = t.value(a);
  for (auto& v : out.data) v *= c;
  const bool ng = t.needs_grad(a);
  const int aid = a.id;
  auto bp = [aid, c](Tape& tp, int self) {
    const Tensor& g = tp.node(self).grad;
    Tensor& da = tp.grad_buf(aid);
    for (std::size_t i = 0; i < g.data.size(); ++i) da.data[i] += c * g.data[i];
  };
  return Var{&t, t.push(std::move(out), ng, ng ? std::function<void(Tape&, int)>(bp) : nullptr)};
}

Var square(Var a) { return mul(a, a); }

Var sum(Var x) {
  Tape& t = *x.tape;
  const Tensor& xv = t.value(x);
  double acc = 0.0;
  for (double v : xv.data) acc += v;
  const bool ng = t.needs_grad(x);
  const int xid = x.id;
  auto bp = [xid](Tape& tp, int self) {
    const double g = tp.node(self).grad.data[0];
    Tensor& dx = tp.grad_buf(xid);
    for (auto& v : dx.data) v += g;
  };
  return Var{&t, t.push(Tensor::scalar(acc), ng, ng ? std::function<void(Tape&, int)>(bp) : nullptr)};
}

Var mean(Var x) {
  Tape& t = *x.tape;
  const Tensor& xv = t.value(x);
  const double inv = 1.0 / static_cast<double>(xv.numel());
  double acc = 0.0;
  for (double v : xv.data) acc += v;
  acc *= inv;
  const bool ng = t.needs_grad(x);
  const int xid = x.id;
  auto bp = [xid, inv](Tape& tp, int self) {
    const double g = tp.node(self).grad.data[0] * inv;
    Tensor& dx = tp.grad_buf(xid);
    for (auto& v : dx.data) v += g;
  };
  return Var{&t, t.push(Tensor::scalar(acc), ng, ng ? std::function<void(Tape&, int)>(bp) : nullptr)};
}

Var concat_ch(Var a, Var b) {
  check_same_tape(a, b);
  Tape& t = *a.tape;
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  check_rank(av, 3, "concat_ch lhs");
  check_rank(bv, 3, "concat_ch rhs");
  if (av.shape[1] != bv.shape[1] || av.shape[2] != bv.shape[2])
    throw std::invalid_argument("concat_ch: spatial dims differ, " + shape_str(av.shape) + " vs " +
                                shape_str(bv.shape));
  Tensor out = Tensor::zeros({av.shape[0] + bv.shape[0], av.shape[1], av.shape[2]});
  std::copy(av.data.begin(), av.data.end(), out.data.begin());
  std::copy(bv.data.begin(), bv.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(av.data.size()));
  const bool ng = t.needs_grad(a) || t.needs_grad(b);
  const int aid = a.id, bid = b.id;
  const std::size_t asize = av.data.size();
  auto bp = [aid, bid, asize](Tape& tp, int self) {
    const Tensor& g = tp.node(self).grad;
    if (tp.node(aid).needs_grad) {
      Tensor& da = tp.grad_buf(aid);
      for (std::size_t i = 0; i < asize; ++i) da.data[i] += g.data[i];
    }
    if (tp.node(bid).needs_grad) {
      Tensor& db = tp.grad_buf(bid);
      for (std::size_t i = 0; i < db.data.size(); ++i) db.data[i] += g.data[asize + i];
    }
  };
  return Var{&t, t.push(std::move(out), ng, ng ? std::function<void(Tape&, int)>(bp) : nullptr)};
}

Var dense(Var x, Var w, Var b) {
  check_same_tape(x, w);
  check_same_tape(x, b);
  Tape& t = *x.tape;
  const Tensor& xv = t.value(x);
  const Tensor& wv = t.value(w);
  const Tensor& bv = t.value(b);
  check_rank(wv, 2, "dense weight");
  check_rank(bv, 1, "dense bias");
  const int m = wv.shape[0], n = wv.shape[1];
  if (xv.numel() != n)
    throw std::invalid_argument("dense: input has " + std::to_string(xv.numel()) +
                                " elements but weight expects " + std::to_string(n));
  if (bv.shape[0] != m)
    throw std::invalid_argument("dense: bias dim " + std::to_string(bv.shape[0]) +
                                " != output dim " + std::to_string(m));
  Tensor out = Tensor::zeros({m});
  kernels::matvec_fwd(wv.data.data(), xv.data.data(), bv.data.data(), out.data.data(), m, n);
  const bool ng = t.needs_grad(x) || t.needs_grad(w) || t.needs_grad(b);
  const int xid = x.id, wid = w.id, bid = b.id;
  auto bp = [xid, wid, bid, m, n](Tape& tp, int self) {
    const Tensor& g = tp.node(self).grad;
    if (tp.node(xid).needs_grad)
      kernels::matvec_bwd_input(g.data.data(), tp.node(wid).value.data.data(),
                                tp.grad_buf(xid).data.data(), m, n);
    if (tp.node(wid).needs_grad)
      kernels::matvec_bwd_weight(g.data.data(), tp.node(xid).value.data.data(),
                                 tp.grad_buf(wid).data.data(), m, n);
    if (tp.node(bid).needs_grad) {
      Tensor& db = tp.grad_buf(bid);
      for (int i = 0; i < m; ++i) db.data[static_cast<std::size_t>(i)] += g.data[static_cast<std::size_t>(i)];
    }
  };
  return Var{&t, t.push(std::move(out), ng, ng ? std::function<void(Tape&, int)>(bp) : nullptr)};
}

Var as_scalar(Var x) {
  Tape& t = *x.tape;
  const Tensor& xv = t.value(x);
  if (xv.numel() != 1)
    throw std::invalid_argument("as_scalar: input has " + std::to_string(xv.numel()) + " elements");
  const bool ng = t.needs_grad(x);
  const int xid = x.id;
  auto bp = [xid](Tape& tp, int self) {
    tp.grad_buf(xid).data[0] += tp.node(self).grad.data[0];
  };
  return Var{&t, t.push(Tensor::scalar(xv.data[0]), ng, ng ? std::function<void(Tape&, int)>(bp) : nullptr)};
}

Var sq_norm_to(Var x, const Tensor& target) {
  Tape& t = *x.tape;
  const Tensor& xv = t.value(x);
  if (!xv.same_shape(target))
    throw std::invalid_argument("sq_norm_to: shape mismatch " + shape_str(xv.shape) + " vs target " +
                                shape_str(target.shape));
  double acc = 0.0;
  for (std::size_t i = 0; i < xv.data.size(); ++i) {
    const double r = xv.data[i] - target.data[i];
    acc += r * r;
  }
  const bool ng = t.needs_grad(x);
  const int xid = x.id;
  Tensor tgt = target;
  auto bp = [xid, tgt](Tape& tp, int self) {
    const double g = tp.node(self).grad.data[0];
    const Tensor& in = tp.node(xid).value;
    Tensor& dx = tp.grad_buf(xid);
    for (std::size_t i = 0; i < in.data.size(); ++i)
      dx.data[i] += g * 2.0 * (in.data[i] - tgt.data[i]);
  };
  return Var{&t, t.push(Tensor::scalar(acc), ng, ng ? std::function<void(Tape&, int)>(bp) : nullptr)};
}

Var quad_penalty(Var x, const Tensor& center, const Tensor& weight) {
  Tape& t = *x.tape;
  const Tensor& xv = t.value(x);
  if (xv.numel() != center.numel() || xv.numel() != weight.numel())
    throw std::invalid_argument("quad_penalty: length mismatch, x has " + std::to_string(xv.numel()) +
                                " elements, center " + std::to_string(center.numel()) + ", weight " +
                                std::to_string(weight.numel()));
  double acc = 0.0;
  for (std::size_t i = 0; i < xv.data.size(); ++i) {
    const double d = xv.data[i] - center.data[i];
    acc += 0.5 * weight.data[i] * d * d;
  }
  const bool ng = t.needs_grad(x);
  const int xid = x.id;
  Tensor c = center, w = weight;
  auto bp = [xid, c, w](Tape& tp, int self) {
    const double g = tp.node(self).grad.data[0];
    const Tensor& in = tp.node(xid).value;
    Tensor& dx = tp.grad_buf(xid);
    for (std::size_t i = 0; i < in.data.size(); ++i)
      dx.data[i] += g * w.data[i] * (in.data[i] - c.data[i]);
  };
  return Var{&t, t.push(Tensor::scalar(acc), ng, ng ? std::function<void(Tape&, int)>(bp) : nullptr)};
}

}  // namespace aclab
