#include "disent/numerics/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "disent/errors.hpp"
#include "disent/numerics/kernels.hpp"
#include "disent/numerics/param_store.hpp"

namespace disent {

Tape::Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

Tape::Var Tape::input(const Matrix& value) {
  Node n;
  n.ref = &value;
  return push(std::move(n));
}

Tape::Var Tape::constant(Matrix value) {
  Node n;
  n.owned = std::move(value);
  return push(std::move(n));
}

Tape::Var Tape::param(ParamSlot& slot) {
  Node n;
  n.op = Op::param;
  n.ref = &slot.value;
  n.slot = &slot;
  n.requires_grad = true;
  return push(std::move(n));
}

Tape::Var Tape::frozen(const ParamSlot& slot) { return input(slot.value); }

const Matrix& Tape::value(Var v) const { return nodes_.at(v.id).value(); }

double Tape::scalar(Var v) const {
  const Matrix& m = value(v);
  if (m.size() != 1) throw DimensionError("Tape::scalar on a non-scalar node");
  return m(0, 0);
}

Tape::Var Tape::dense(Var x, Var w, Var b) {
  const Node& wn = nodes_[w.id];
  const Node& bn = nodes_[b.id];
  const std::string wname = wn.slot ? wn.slot->name : std::string("W");
  const std::string bname = bn.slot ? bn.slot->name : std::string("b");
  Node n;
  n.op = Op::dense;
  n.in0 = x.id;
  n.in1 = w.id;
  n.in2 = b.id;
  n.owned = dense_forward(value(x), wn.value(), bn.value(), wname, bname);
  n.requires_grad = nodes_[x.id].requires_grad || wn.requires_grad || bn.requires_grad;
  return push(std::move(n));
}

Tape::Var Tape::leaky_relu(Var x, double slope) {
  Node n;
  n.op = Op::leaky_relu;
  n.in0 = x.id;
  n.aux = slope;
  n.owned = value(x);
  leaky_relu_inplace(n.owned, slope);
  n.requires_grad = nodes_[x.id].requires_grad;
  return push(std::move(n));
}

Tape::Var Tape::softmax(Var logits) {
  Node n;
  n.op = Op::softmax;
  n.in0 = logits.id;
  n.owned = value(logits);
  softmax_rows_inplace(n.owned);
  n.requires_grad = nodes_[logits.id].requires_grad;
  return push(std::move(n));
}

Tape::Var Tape::cross_entropy(Var probs, std::span<const std::size_t> rows,
                              std::span<const std::size_t> classes) {
  const Matrix& p = value(probs);
  if (rows.size() != classes.size()) throw DimensionError("cross_entropy: rows/classes length");
  if (rows.empty()) throw ArgumentError("cross_entropy over an empty row set");
  double sum = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= p.rows()) throw ArgumentError("cross_entropy: row out of range");
    sum += disent::cross_entropy(p.row(rows[k]), classes[k]);
  }
  Node n;
  n.op = Op::cross_entropy;
  n.in0 = probs.id;
  n.rows.assign(rows.begin(), rows.end());
  n.classes.assign(classes.begin(), classes.end());
  n.owned = Matrix(1, 1, sum / static_cast<double>(rows.size()));
  n.requires_grad = nodes_[probs.id].requires_grad;
  return push(std::move(n));
}

Tape::Var Tape::l1(Var x, Var target) {
  const Matrix& a = value(x);
  const Matrix& b = value(target);
  require_shape(b, a.rows(), a.cols(), "l1 target");
  Node n;
  n.op = Op::l1;
  n.in0 = x.id;
  n.in1 = target.id;
  n.owned = Matrix(1, 1, l1_loss(a.values(), b.values()));
  n.requires_grad = nodes_[x.id].requires_grad || nodes_[target.id].requires_grad;
  return push(std::move(n));
}

Tape::Var Tape::max_prob(Var probs, std::span<const std::size_t> rows) {
  const Matrix& p = value(probs);
  if (rows.empty()) throw ArgumentError("max_prob over an empty row set");
  double sum = 0.0;
  for (std::size_t r : rows) {
    if (r >= p.rows()) throw ArgumentError("max_prob: row out of range");
    const auto row = p.row(r);
    sum += *std::max_element(row.begin(), row.end());
  }
  Node n;
  n.op = Op::max_prob;
  n.in0 = probs.id;
  n.rows.assign(rows.begin(), rows.end());
  n.owned = Matrix(1, 1, sum / static_cast<double>(rows.size()));
  n.requires_grad = nodes_[probs.id].requires_grad;
  return push(std::move(n));
}

Tape::Var Tape::concat_cols(Var a, Var b) {
  const Matrix& x = value(a);
  const Matrix& y = value(b);
  if (x.rows() != y.rows()) throw DimensionError("concat_cols: row counts differ");
  Node n;
  n.op = Op::concat;
  n.in0 = a.id;
  n.in1 = b.id;
  n.owned = Matrix(x.rows(), x.cols() + y.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto out = n.owned.row(r);
    std::copy(x.row(r).begin(), x.row(r).end(), out.begin());
    std::copy(y.row(r).begin(), y.row(r).end(), out.begin() + static_cast<std::ptrdiff_t>(x.cols()));
  }
  n.requires_grad = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  return push(std::move(n));
}

Tape::Var Tape::add(Var a, Var b) {
  const Matrix& x = value(a);
  require_shape(value(b), x.rows(), x.cols(), "add");
  Node n;
  n.op = Op::add;
  n.in0 = a.id;
  n.in1 = b.id;
  n.owned = x;
  const auto y = value(b).values();
  auto out = n.owned.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += y[i];
  n.requires_grad = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  return push(std::move(n));
}

Tape::Var Tape::sub(Var a, Var b) {
  const Matrix& x = value(a);
  require_shape(value(b), x.rows(), x.cols(), "sub");
  Node n;
  n.op = Op::sub;
  n.in0 = a.id;
  n.in1 = b.id;
  n.owned = x;
  const auto y = value(b).values();
  auto out = n.owned.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= y[i];
  n.requires_grad = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  return push(std::move(n));
}

Tape::Var Tape::scale(Var a, double s) {
  Node n;
  n.op = Op::scale;
  n.in0 = a.id;
  n.aux = s;
  n.owned = value(a);
  for (double& v : n.owned.values()) v *= s;
  n.requires_grad = nodes_[a.id].requires_grad;
  return push(std::move(n));
}

Tape::Var Tape::clip_max(Var a, double cap) {
  Node n;
  n.op = Op::clip_max;
  n.in0 = a.id;
  n.aux = cap;
  n.owned = value(a);
  for (double& v : n.owned.values()) v = std::min(v, cap);
  n.requires_grad = nodes_[a.id].requires_grad;
  return push(std::move(n));
}

Matrix& Tape::grad_of(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty() && !n.value().empty()) n.grad = Matrix(n.value().rows(), n.value().cols());
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.id >= nodes_.size()) throw ArgumentError("backward: unknown node");
  if (value(loss).size() != 1) throw DimensionError("backward requires a scalar loss node");

  for (auto& n : nodes_) {
    n.grad = Matrix();
    if (n.op == Op::param) n.slot->grad.fill(0.0);
  }
  if (!nodes_[loss.id].requires_grad) return;
  grad_of(loss.id)(0, 0) = 1.0;

  for (std::size_t id = loss.id + 1; id-- > 0;) {
    const Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.empty()) continue;
    backprop(n);
  }
}

void Tape::backprop(const Node& n) {
  const auto& k = kernels::active();
  const Matrix& g = n.grad;
  switch (n.op) {
    case Op::leaf:
      break;
    case Op::param: {
      auto dst = n.slot->grad.values();
      const auto src = g.values();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
      break;
    }
    case Op::dense: {
      const Matrix& x = nodes_[n.in0].value();
      const Matrix& w = nodes_[n.in1].value();
      if (nodes_[n.in0].requires_grad)  // dX += dY * W
        k.gemm_nn_acc(g.rows(), w.cols(), g.cols(), g.data(), w.data(), grad_of(n.in0).data());
      if (nodes_[n.in1].requires_grad)  // dW += dY^T * X
        k.gemm_tn_acc(w.rows(), w.cols(), g.rows(), g.data(), x.data(), grad_of(n.in1).data());
      if (nodes_[n.in2].requires_grad) {
        auto db = grad_of(n.in2).values();
        for (std::size_t r = 0; r < g.rows(); ++r) {
          const auto gr = g.row(r);
          for (std::size_t c = 0; c < gr.size(); ++c) db[c] += gr[c];
        }
      }
      break;
    }
    case Op::leaky_relu: {
      const Matrix& x = nodes_[n.in0].value();
      const double neg = fault_ ? 1.0 - n.aux : n.aux;
      auto dx = grad_of(n.in0).values();
      const auto xv = x.values();
      const auto gv = g.values();
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += xv[i] > 0.0 ? gv[i] : neg * gv[i];
      break;
    }
    case Op::softmax: {
      const Matrix& p = n.value();
      Matrix& dx = grad_of(n.in0);
      for (std::size_t r = 0; r < p.rows(); ++r) {
        const auto pr = p.row(r);
        const auto gr = g.row(r);
        const double s = k.dot(pr.data(), gr.data(), pr.size());
        auto out = dx.row(r);
        for (std::size_t c = 0; c < pr.size(); ++c) out[c] += pr[c] * (gr[c] - s);
      }
      break;
    }
    case Op::cross_entropy: {
      const Matrix& p = nodes_[n.in0].value();
      Matrix& dp = grad_of(n.in0);
      const double scale = g(0, 0) / static_cast<double>(n.rows.size());
      for (std::size_t i = 0; i < n.rows.size(); ++i) {
        const std::size_t r = n.rows[i];
        const std::size_t c = n.classes[i];
        dp(r, c) -= scale / (p(r, c) + kLogEpsilon);
      }
      break;
    }
    case Op::l1: {
      const auto a = nodes_[n.in0].value().values();
      const auto b = nodes_[n.in1].value().values();
      const double scale = g(0, 0) / static_cast<double>(a.size());
      const bool ga = nodes_[n.in0].requires_grad;
      const bool gb = nodes_[n.in1].requires_grad;
      std::span<double> da = ga ? grad_of(n.in0).values() : std::span<double>{};
      std::span<double> db = gb ? grad_of(n.in1).values() : std::span<double>{};
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        const double s = d > 0.0 ? scale : (d < 0.0 ? -scale : 0.0);
        if (ga) da[i] += s;
        if (gb) db[i] -= s;
      }
      break;
    }
    case Op::max_prob: {
      const Matrix& p = nodes_[n.in0].value();
      Matrix& dp = grad_of(n.in0);
      const double scale = g(0, 0) / static_cast<double>(n.rows.size());
      for (std::size_t r : n.rows) dp(r, argmax(p.row(r))) += scale;
      break;
    }
    case Op::concat: {
      const std::size_t ca = nodes_[n.in0].value().cols();
      const bool ga = nodes_[n.in0].requires_grad;
      const bool gb = nodes_[n.in1].requires_grad;
      for (std::size_t r = 0; r < g.rows(); ++r) {
        const auto gr = g.row(r);
        if (ga) {
          auto out = grad_of(n.in0).row(r);
          for (std::size_t c = 0; c < ca; ++c) out[c] += gr[c];
        }
        if (gb) {
          auto out = grad_of(n.in1).row(r);
          for (std::size_t c = 0; c < out.size(); ++c) out[c] += gr[ca + c];
        }
      }
      break;
    }
    case Op::add:
    case Op::sub: {
      const double sign = n.op == Op::add ? 1.0 : -1.0;
      const auto gv = g.values();
      if (nodes_[n.in0].requires_grad) {
        auto d = grad_of(n.in0).values();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += gv[i];
      }
      if (nodes_[n.in1].requires_grad) {
        auto d = grad_of(n.in1).values();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += sign * gv[i];
      }
      break;
    }
    case Op::scale: {
      auto d = grad_of(n.in0).values();
      const auto gv = g.values();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += n.aux * gv[i];
      break;
    }
    case Op::clip_max: {
      const auto x = nodes_[n.in0].value().values();
      auto d = grad_of(n.in0).values();
      const auto gv = g.values();
      for (std::size_t i = 0; i < d.size(); ++i)
        if (x[i] <= n.aux) d[i] += gv[i];
      break;
    }
  }
}

}  // namespace disent
