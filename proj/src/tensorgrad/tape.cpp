#include "lidardrive/tensorgrad/tape.hpp"

#include <stdexcept>

namespace lidardrive::tensorgrad {

Tape::Node& Tape::node(Var v) {
  if (v.id >= nodes_.size()) throw std::out_of_range("Tape: invalid Var");
  return nodes_[v.id];
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id >= nodes_.size()) throw std::out_of_range("Tape: invalid Var");
  return nodes_[v.id];
}

Var Tape::push(Node n) {
  if (finite_check_) {
    const Tensor& val = n.param ? n.param->value : n.value;
    if (!val.all_finite()) {
      throw NonFiniteError("Tape: non-finite value at node " + std::to_string(nodes_.size()));
    }
  }
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::param(Parameter& p) {
  if (auto it = param_ids_.find(&p); it != param_ids_.end()) return Var{it->second};
  Node n;
  n.param = &p;
  n.requires_grad = grad_enabled_;
  Var v = push(std::move(n));
  param_ids_.emplace(&p, v.id);
  return v;
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  if (grad_enabled_) {
    for (Var in : inputs) {
      if (in.valid() && node(in).requires_grad) {
        n.requires_grad = true;
        break;
      }
    }
  }
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

Var Tape::record(Tensor value, const std::vector<Var>& inputs, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  if (grad_enabled_) {
    for (Var in : inputs) {
      if (in.valid() && node(in).requires_grad) {
        n.requires_grad = true;
        break;
      }
    }
  }
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

const Tensor& Tape::value(Var v) const {
  const Node& n = node(v);
  return n.param ? n.param->value : n.value;
}

bool Tape::requires_grad(Var v) const { return v.valid() && node(v).requires_grad; }

const Tensor* Tape::grad(Var v) const {
  const Node& n = node(v);
  return n.has_grad ? &n.grad : nullptr;
}

Tensor* Tape::grad_buffer(Var v) {
  if (!v.valid()) return nullptr;
  Node& n = node(v);
  if (!n.requires_grad) return nullptr;
  if (!n.has_grad) {
    const Tensor& val = n.param ? n.param->value : n.value;
    if (n.grad.shape() == val.shape()) {
      n.grad.fill(0.0);
    } else {
      n.grad = Tensor(val.shape());
    }
    n.has_grad = true;
  }
  return &n.grad;
}

void Tape::backward(Var loss, double seed, std::size_t stop_before) {
  if (value(loss).size() != 1) throw ShapeError("Tape::backward: loss must be a scalar");
  Tensor* g = grad_buffer(loss);
  if (g == nullptr) return;  // loss does not depend on anything trainable
  (*g)[0] += seed;
  for (std::size_t i = loss.id + 1; i-- > stop_before;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.backward) continue;
    const Tensor& out = n.value;
    n.backward(*this, out, n.grad);
  }
}

void Tape::zero_grad() {
  for (auto& n : nodes_) n.has_grad = false;
}

void Tape::flush_param_grads(double scale) {
  for (auto& n : nodes_) {
    if (!n.param || !n.has_grad) continue;
    auto dst = n.param->grad.data();
    auto src = n.grad.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
  }
}

}  // namespace lidardrive::tensorgrad
