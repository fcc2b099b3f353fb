#include "tracefix/nn/tape.hpp"

#include <algorithm>

#include "tracefix/error.hpp"

namespace tracefix::nn {

const Tensor& Var::value() const {
  if (!tape_) throw TapeError("value() on a detached variable");
  return tape_->value(id_);
}

const Tensor& Var::grad() const {
  if (!tape_) throw TapeError("grad() on a detached variable");
  return tape_->grad(id_);
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), nullptr, {}, {}, nullptr, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::view(const Tensor& value) {
  nodes_.push_back(Node{{}, &value, {}, {}, nullptr, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Parameter& param) {
  if (param.grad.shape() != param.value.shape() || param.grad.empty()) param.grad = Tensor(param.value.shape());
  nodes_.push_back(Node{{}, &param.value, {}, {}, requires_grad_ ? &param : nullptr, requires_grad_});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
  bool needs = false;
  for (const auto& in : inputs) {
    if (in.tape() != this) throw TapeError("operation mixes variables from different tapes");
    needs = needs || nodes_[in.id()].needs_grad;
  }
  needs = needs && requires_grad_;
  nodes_.push_back(Node{std::move(value), nullptr, {}, needs ? std::move(fn) : BackwardFn{}, nullptr, needs});
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::value(std::size_t id) const {
  const Node& n = nodes_.at(id);
  return n.external ? *n.external : n.value;
}

Tensor& Tape::grad(std::size_t id) {
  Node& n = nodes_.at(id);
  const Tensor& v = value(id);
  if (n.grad.shape() != v.shape() || n.grad.numel() != v.numel()) n.grad = Tensor(v.shape());
  return n.grad;
}

void Tape::backward(const Var& loss) {
  if (loss.tape() != this) throw TapeError("backward() on a variable that does not belong to this tape");
  if (!requires_grad_) throw TapeError("backward() on a tape recorded without gradients");
  if (value(loss.id()).numel() != 1)
    throw TapeError("backward() needs a scalar loss, got shape " + shape_str(value(loss.id()).shape()));

  for (auto& n : nodes_) n.grad = Tensor();
  grad(loss.id()).fill(1.0f);
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.empty()) continue;
    if (n.param) {
      auto dst = n.param->grad.values();
      auto src = n.grad.values();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    } else if (n.backward) {
      n.backward(*this, i);
    }
  }
}

}  // namespace tracefix::nn
