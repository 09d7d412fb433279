#pragma once

#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "newsrec/optim.hpp"
#include "newsrec/tensor.hpp"

namespace newsrec {

// Handle to a node on a Tape.
struct Var {
  int32_t id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode gradient tape over a fixed op set. Values are computed
// eagerly; backward() walks the nodes in reverse creation order and
// accumulates exact gradients. Parameter leaves flush their gradient into
// the Parameter's own accumulator, so several tapes run in sequence sum
// their contributions (mini-batch accumulation).
//
// A Tape is single-threaded; independent tapes share no mutable state
// apart from the Parameter gradient sinks.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaves.
  Var constant(Tensor value);
  Var zeros(std::vector<int64_t> shape);
  Var param(Parameter& p);
  Var embedding_row(Parameter& table, int64_t row);

  // Ops. `linear` accepts an invalid bias Var for the bias-free case.
  Var linear(Var x, Var w, Var b = Var{});
  Var concat(std::span<const Var> parts);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var smul(Var s, Var v);
  Var mean(std::span<const Var> parts);
  Var sum(std::span<const Var> parts);
  Var softmax(Var v);
  Var tanh(Var v);
  Var dot(Var a, Var b);
  Var pick(Var v, int64_t i);
  Var logsumexp(Var v);

  const Tensor& value(Var v) const { return node(v).value; }
  double scalar_value(Var v) const;
  bool needs_grad(Var v) const { return node(v).needs_grad; }

  // Seeds the scalar `loss` node with `seed` and accumulates gradients
  // into every reachable parameter leaf.
  void backward(Var loss, double seed = 1.0);

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;  // allocated on first backward write
    bool needs_grad = false;
    std::function<void(Tape&)> back;
  };

  Node& node(Var v);
  const Node& node(Var v) const;
  std::vector<double>& grad_buf(int32_t id);
  Var push(Tensor value, bool needs_grad, std::function<void(Tape&)> back);

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, int32_t> param_memo_;
  int32_t flush_id_ = -1;  // node whose backward closure is running
};

// Central-difference gradient oracle: (f(x + eps e_i) - f(x - eps e_i)) /
// (2 eps) per coordinate. Independent of the tape; used to check every
// backward pass.
using ScalarFn = std::function<double(const Tensor&)>;
Tensor finite_diff_grad(const ScalarFn& f, const Tensor& x, double eps);

}  // namespace newsrec
