#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <vector>

#include "tracefix/nn/tensor.hpp"

namespace tracefix::nn {

class Tape;

// Handle to a value recorded on a Tape.
class Var {
public:
  Var() = default;

  bool valid() const noexcept { return tape_ != nullptr; }
  Tape* tape() const noexcept { return tape_; }
  std::size_t id() const noexcept { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  const Tensor& grad() const;

private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Records differentiable operations in execution order; backward() walks the
// record in exact reverse. A tape built with requires_grad = false keeps only
// values and is used for inference.
class Tape {
public:
  // Receives the tape and the id of the node whose output gradient is ready.
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  explicit Tape(bool requires_grad = true) : requires_grad_(requires_grad) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool requires_grad() const noexcept { return requires_grad_; }

  Var constant(Tensor value);
  // Leaf that reads `value` in place; the tensor must outlive the tape.
  Var view(const Tensor& value);
  // Leaf bound to a parameter; backward() adds into param.grad.
  Var parameter(Parameter& param);

  // Used by op implementations. `fn` is dropped when no input needs a gradient.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn);

  // Seeds d(loss)/d(loss) = 1 and propagates. Parameter gradients accumulate
  // across calls; they are never reset here.
  void backward(const Var& loss);

  const Tensor& value(std::size_t id) const;
  // Gradient buffer of a node, allocated (zeroed) on first access.
  Tensor& grad(std::size_t id);
  bool needs_grad(std::size_t id) const { return nodes_.at(id).needs_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

private:
  struct Node {
    Tensor value;
    const Tensor* external = nullptr;
    Tensor grad;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool needs_grad = false;
  };

  std::vector<Node> nodes_;
  bool requires_grad_;
};

}  // namespace tracefix::nn
