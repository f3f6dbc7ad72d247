#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "disent/numerics/matrix.hpp"
#include "disent/numerics/ops.hpp"

namespace disent {

struct ParamSlot;

// Records batched matrix operations for reverse-mode differentiation of a
// scalar loss. Nodes are appended in evaluation order, so reverse insertion
// order is a valid reverse topological order and backward() visits each node
// once. A tape is single-use and not shareable across threads.
class Tape {
 public:
  struct Var {
    std::size_t id;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf that references `value` without copying; caller keeps it alive.
  Var input(const Matrix& value);
  Var constant(Matrix value);
  // Trainable leaf: backward() zeroes slot.grad and writes d loss / d slot.value.
  Var param(ParamSlot& slot);
  // Parameter read as a constant; no gradient is written to it.
  Var frozen(const ParamSlot& slot);

  // x: B x in, w: out x in, b: 1 x out  ->  B x out
  Var dense(Var x, Var w, Var b);
  Var leaky_relu(Var x, double slope = kLeakySlope);
  Var softmax(Var logits);
  // Mean over `rows` of -ln(probs[row][classes[k]] + eps); scalar.
  Var cross_entropy(Var probs, std::span<const std::size_t> rows,
                    std::span<const std::size_t> classes);
  // Mean absolute difference over every entry; scalar.
  Var l1(Var x, Var target);
  // Mean over `rows` of max_k probs[row][k]; scalar.
  Var max_prob(Var probs, std::span<const std::size_t> rows);
  Var concat_cols(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var scale(Var a, double s);
  // min(a, cap) elementwise; zero gradient where the cap is active.
  Var clip_max(Var a, double cap);

  const Matrix& value(Var v) const;
  double scalar(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  // Gradient of the last backward() loss w.r.t. an intermediate node.
  const Matrix& grad(Var v) const { return nodes_[v.id].grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

  void backward(Var loss);

  // Negative control for the gradient checker: makes the leaky-ReLU backward
  // rule use the wrong negative-side slope.
  void inject_fault(bool on) noexcept { fault_ = on; }

 private:
  enum class Op {
    leaf,
    param,
    dense,
    leaky_relu,
    softmax,
    cross_entropy,
    l1,
    max_prob,
    concat,
    add,
    sub,
    scale,
    clip_max
  };

  struct Node {
    Op op = Op::leaf;
    std::size_t in0 = 0;
    std::size_t in1 = 0;
    std::size_t in2 = 0;
    double aux = 0.0;
    std::vector<std::size_t> rows;
    std::vector<std::size_t> classes;
    Matrix owned;
    const Matrix* ref = nullptr;
    ParamSlot* slot = nullptr;
    Matrix grad;
    bool requires_grad = false;

    const Matrix& value() const { return ref != nullptr ? *ref : owned; }
  };

  Var push(Node node);
  Matrix& grad_of(std::size_t id);
  void backprop(const Node& node);

  std::vector<Node> nodes_;
  bool fault_ = false;
};

}  // namespace disent
