#pragma once

#include <deque>
#include <functional>
#include <vector>

#include "sensegen/tensor.hpp"

namespace sensegen {

class Tape;

// Handle to a tensor recorded on a tape.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Tensor& value() const;
  bool valid() const { return tape != nullptr && id >= 0; }
};

// Result of Tape::backward. Every recorded tensor has an entry; tensors the
// loss never touched hold exact zeros.
class Gradients {
public:
  explicit Gradients(std::vector<Tensor> grads) : grads_(std::move(grads)) {}

  const Tensor& at(Var v) const;
  double scalar_at(Var v) const;

private:
  std::vector<Tensor> grads_;
};

// Ordered record of primitive ops. Replaying it backward from a scalar loss
// accumulates d(loss)/d(node) for every node, in the exact reverse order of
// recording, which makes gradients bit-reproducible.
class Tape {
public:
  using BackFn = std::function<void(Tape&, const Tensor& g, std::vector<Tensor>& grads)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Record a leaf (parameter or input constant).
  Var leaf(Tensor value);

  // Record a computed node. back may be empty for non-differentiable ops.
  Var push(Tensor value, BackFn back);

  const Tensor& value_of(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  std::size_t size() const { return nodes_.size(); }

  // Reverse sweep from a scalar loss.
  Gradients backward(Var loss) const;

private:
  struct Node {
    Tensor value;
    BackFn back;
  };
  std::deque<Node> nodes_;
};

// Primitive ops. Each computes its value through the tops kernels and
// registers the local gradient rule.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var sigmoid(Var x);
Var tanh(Var x);
Var exp(Var x);
Var log(Var x);
Var axpb(Var x, double a, double b);
Var clamp_min(Var x, double lo);
Var clamp(Var x, double lo, double hi);
Var softmax(Var x);
Var log_sum_exp(Var x);  // scalar output
Var sum(Var x);          // scalar output
Var slice(Var x, std::size_t offset, std::size_t len);
// vector minus broadcast scalar
Var sub_bcast(Var vec, Var scalar);

}  // namespace sensegen
