#include "mrda/nn/param_set.hpp"

#include <stdexcept>

namespace mrda::nn {

template <typename T>
void BasicParamSet<T>::add(std::string name, Tensor<T> value, bool meta_mask) {
  if (index_.count(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  index_.emplace(name, entries_.size());
  entries_.push_back(Entry{std::move(name), std::move(value), meta_mask});
}

template <typename T>
bool BasicParamSet<T>::contains(std::string_view name) const {
  return index_.count(std::string(name)) != 0;
}

template <typename T>
std::size_t BasicParamSet<T>::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw std::invalid_argument("unknown parameter: " + std::string(name));
  return it->second;
}

template <typename T>
void BasicParamSet<T>::assign(std::string_view name, const Tensor<T>& value) {
  Entry& e = entries_[index_of(name)];
  if (e.value.shape() != value.shape()) {
    throw std::invalid_argument("shape mismatch assigning " + e.name + ": " + shape_to_string(e.value.shape()) +
                                " vs " + shape_to_string(value.shape()));
  }
  e.value = value;
}

template <typename T>
void BasicParamSet<T>::set_meta_mask(std::string_view name, bool mask) {
  entries_[index_of(name)].meta_mask = mask;
}

template <typename T>
BasicParamSet<T> BasicParamSet<T>::zeros_like() const {
  BasicParamSet out;
  for (const Entry& e : entries_) out.add(e.name, Tensor<T>(e.value.shape()), e.meta_mask);
  return out;
}

template <typename T>
bool BasicParamSet<T>::same_structure(const BasicParamSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != other.entries_[i].name) return false;
    if (entries_[i].value.shape() != other.entries_[i].value.shape()) return false;
  }
  return true;
}

template <typename T>
std::size_t BasicParamSet<T>::total_elements() const {
  std::size_t n = 0;
  for (const Entry& e : entries_) n += e.value.numel();
  return n;
}

template <typename T>
bool BasicParamSet<T>::operator==(const BasicParamSet& other) const {
  if (!same_structure(other)) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].meta_mask != other.entries_[i].meta_mask) return false;
    if (!(entries_[i].value == other.entries_[i].value)) return false;
  }
  return true;
}

template <typename T>
ParamBinding<T>::ParamBinding(Tape<T>& tape, const BasicParamSet<T>& params, GradScope scope)
    : params_(&params) {
  vars_.reserve(params.size());
  for (const auto& e : params) {
    const bool grad = scope == GradScope::kAll || (scope == GradScope::kMetaMasked && e.meta_mask);
    vars_.push_back(grad ? tape.variable(e.value) : tape.constant(e.value));
  }
}

template <typename T>
Var ParamBinding<T>::operator[](std::string_view name) const {
  return vars_[params_->index_of(name)];
}

template <typename T>
BasicParamSet<T> ParamBinding<T>::gradients(const Tape<T>& tape) const {
  BasicParamSet<T> out;
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    const auto& e = params_->entry(i);
    out.add(e.name, tape.grad(vars_[i]), e.meta_mask);
  }
  return out;
}

template <typename T>
void masked_sgd_step(BasicParamSet<T>& params, const BasicParamSet<T>& grads, T lr) {
  if (!params.same_structure(grads)) throw std::invalid_argument("masked_sgd_step: structure mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params.entry(i).meta_mask) continue;
    auto p = params.values(i);
    const auto& g = grads.entry(i).value;
    for (std::size_t k = 0; k < p.size(); ++k) p[k] -= lr * g[k];
  }
}

template <typename T>
void axpy(BasicParamSet<T>& acc, const BasicParamSet<T>& other, T w) {
  if (!acc.same_structure(other)) throw std::invalid_argument("axpy: structure mismatch");
  for (std::size_t i = 0; i < acc.size(); ++i) {
    auto a = acc.values(i);
    const auto& o = other.entry(i).value;
    for (std::size_t k = 0; k < a.size(); ++k) a[k] += w * o[k];
  }
}

template class BasicParamSet<float>;
template class BasicParamSet<double>;
template class ParamBinding<float>;
template class ParamBinding<double>;
template void masked_sgd_step<float>(BasicParamSet<float>&, const BasicParamSet<float>&, float);
template void masked_sgd_step<double>(BasicParamSet<double>&, const BasicParamSet<double>&, double);
template void axpy<float>(BasicParamSet<float>&, const BasicParamSet<float>&, float);
template void axpy<double>(BasicParamSet<double>&, const BasicParamSet<double>&, double);

}  // namespace mrda::nn
