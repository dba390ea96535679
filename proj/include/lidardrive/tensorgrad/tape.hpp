#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <unordered_map>
#include <deque>
#include <vector>

#include "lidardrive/tensorgrad/tensor.hpp"

namespace lidardrive::tensorgrad {

/// Handle to a value recorded on a Tape.
struct Var {
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::size_t id = kNone;

  bool valid() const { return id != kNone; }
  bool operator==(const Var&) const = default;
};

class Tape;

/// Propagates the node's output gradient into its inputs' gradient buffers.
using BackwardFn = std::function<void(Tape&, const Tensor& out, const Tensor& out_grad)>;

/// Ordered record of operations for reverse-mode differentiation.
///
/// Nodes are appended in evaluation order, so the record is topologically
/// sorted; backward walks it in exact reverse. Parameter leaves read their
/// value from the owning Parameter and collect gradients locally until
/// flush_param_grads() adds them into Parameter::grad.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// A leaf that never receives gradients.
  Var constant(Tensor value);
  /// A leaf bound to `p`; repeated calls return the same Var.
  Var param(Parameter& p);

  /// Appends an op output. The backward function is kept only when some
  /// input requires a gradient and gradients are enabled.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);
  Var record(Tensor value, const std::vector<Var>& inputs, BackwardFn backward);

  /// Stays valid for the life of the tape.
  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const;
  /// Accumulated gradient, or nullptr when none has been produced.
  const Tensor* grad(Var v) const;
  /// Gradient buffer for `v`, allocated as zeros on first use; nullptr when
  /// `v` does not require a gradient.
  Tensor* grad_buffer(Var v);

  /// Seeds d(loss)/d(loss) = seed and runs backward rules in reverse order.
  /// Nodes with id < stop_before are not expanded (their buffers still receive
  /// contributions from later nodes).
  void backward(Var loss, double seed = 1.0, std::size_t stop_before = 0);

  /// Clears every gradient buffer on the tape.
  void zero_grad();
  /// Adds scale * (leaf gradient) into each bound Parameter::grad.
  void flush_param_grads(double scale = 1.0);

  void set_grad_enabled(bool enabled) { grad_enabled_ = enabled; }
  bool grad_enabled() const { return grad_enabled_; }
  /// When on, every recorded value is checked and NonFiniteError is thrown.
  void set_finite_check(bool enabled) { finite_check_ = enabled; }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    Parameter* param = nullptr;
    BackwardFn backward;
  };

  Node& node(Var v);
  const Node& node(Var v) const;
  Var push(Node n);

  std::deque<Node> nodes_;  // stable references across record()
  std::unordered_map<const Parameter*, std::size_t> param_ids_;
  bool grad_enabled_ = true;
  bool finite_check_ = false;
};

}  // namespace lidardrive::tensorgrad
