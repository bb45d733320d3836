#pragma once

#include <functional>
#include <vector>

#include "mrda/nn/tensor.hpp"

namespace mrda::nn {

/// Handle to a value recorded on a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Reverse-mode recording of one forward pass.
///
/// Nodes are appended in evaluation order, so a reverse sweep over the node
/// list is a valid topological order for backpropagation. A tape is not
/// thread-safe; concurrent forward passes each own a tape.
template <typename T>
class Tape {
 public:
  /// Propagates the node's output gradient into its inputs via accumulate().
  using BackwardFn = std::function<void(Tape&, const Tensor<T>& out_grad)>;

  Var constant(Tensor<T> value);
  Var variable(Tensor<T> value);

  const Tensor<T>& value(Var v) const;
  bool requires_grad(Var v) const;

  /// Gradient of the last backward() target w.r.t. v. Zeros if v was not reached.
  Tensor<T> grad(Var v) const;
  bool has_grad(Var v) const;

  /// Seeds d(target)/d(target) = 1; target must hold exactly one element.
  void backward(Var target);

  // Used by op implementations.
  Var record(Tensor<T> value, bool requires_grad, BackwardFn fn);
  void accumulate(Var v, const Tensor<T>& g);
  /// Mutable gradient buffer for v, allocated as zeros on first use.
  Tensor<T>& grad_buffer(Var v);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    bool requires_grad = false;
    bool grad_allocated = false;
    BackwardFn backward;
  };
  Node& node(Var v);
  const Node& node(Var v) const;

  std::vector<Node> nodes_;
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace mrda::nn
