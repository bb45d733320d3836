#include "mrda/nn/tape.hpp"

#include <stdexcept>

namespace mrda::nn {

template <typename T>
typename Tape<T>::Node& Tape<T>::node(Var v) {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw std::out_of_range("variable does not belong to this tape");
  }
  return nodes_[static_cast<std::size_t>(v.id)];
}

template <typename T>
const typename Tape<T>::Node& Tape<T>::node(Var v) const {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw std::out_of_range("variable does not belong to this tape");
  }
  return nodes_[static_cast<std::size_t>(v.id)];
}

template <typename T>
Var Tape<T>::constant(Tensor<T> value) {
  return record(std::move(value), false, nullptr);
}

template <typename T>
Var Tape<T>::variable(Tensor<T> value) {
  return record(std::move(value), true, nullptr);
}

template <typename T>
Var Tape<T>::record(Tensor<T> value, bool requires_grad, BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size() - 1)};
}

template <typename T>
const Tensor<T>& Tape<T>::value(Var v) const {
  return node(v).value;
}

template <typename T>
bool Tape<T>::requires_grad(Var v) const {
  return node(v).requires_grad;
}

template <typename T>
bool Tape<T>::has_grad(Var v) const {
  return node(v).grad_allocated;
}

template <typename T>
Tensor<T> Tape<T>::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad_allocated) return n.grad;
  return Tensor<T>(n.value.shape());
}

template <typename T>
Tensor<T>& Tape<T>::grad_buffer(Var v) {
  Node& n = node(v);
  if (!n.grad_allocated) {
    n.grad = Tensor<T>(n.value.shape());
    n.grad_allocated = true;
  }
  return n.grad;
}

template <typename T>
void Tape<T>::accumulate(Var v, const Tensor<T>& g) {
  if (!node(v).requires_grad) return;
  Tensor<T>& buf = grad_buffer(v);
  if (buf.numel() != g.numel()) throw std::logic_error("gradient shape mismatch");
  T* dst = buf.data();
  const T* src = g.data();
  for (std::size_t i = 0; i < g.numel(); ++i) dst[i] += src[i];
}

template <typename T>
void Tape<T>::backward(Var target) {
  Node& t = node(target);
  if (t.value.numel() != 1) throw std::invalid_argument("backward target must be a scalar");
  for (Node& n : nodes_) {
    n.grad_allocated = false;
    n.grad = Tensor<T>();
  }
  if (!t.requires_grad) return;
  grad_buffer(target)[0] = T{1};
  for (int i = target.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.requires_grad || !n.grad_allocated || !n.backward) continue;
    n.backward(*this, n.grad);
  }
}

template class Tape<float>;
template class Tape<double>;

}  // namespace mrda::nn
