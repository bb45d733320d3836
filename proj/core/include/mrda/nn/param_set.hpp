#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mrda/nn/tape.hpp"
#include "mrda/nn/tensor.hpp"

namespace mrda::nn {

/// Ordered, named collection of parameter arrays.
///
/// Each entry carries a meta_mask bit: true marks entries that inner-loop
/// adaptation and meta updates may change; false marks frozen entries (the
/// MLN upscaler once bicubic pretraining is done). Names are unique and
/// shapes are fixed once an entry is added.
template <typename T>
class BasicParamSet {
 public:
  struct Entry {
    std::string name;
    Tensor<T> value;
    bool meta_mask = true;
  };

  void add(std::string name, Tensor<T> value, bool meta_mask = true);

  std::size_t size() const { return entries_.size(); }
  bool contains(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;

  const Entry& entry(std::size_t i) const { return entries_.at(i); }
  const Tensor<T>& tensor(std::string_view name) const { return entries_[index_of(name)].value; }
  std::span<T> values(std::size_t i) { return entries_.at(i).value.values(); }
  std::span<T> values(std::string_view name) { return entries_[index_of(name)].value.values(); }

  /// Replaces the values of an entry; the shape must match.
  void assign(std::string_view name, const Tensor<T>& value);

  bool meta_mask(std::string_view name) const { return entries_[index_of(name)].meta_mask; }
  void set_meta_mask(std::string_view name, bool mask);

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  /// Same names, shapes and masks, all values zero.
  BasicParamSet zeros_like() const;
  /// True when names, order and shapes agree.
  bool same_structure(const BasicParamSet& other) const;
  std::size_t total_elements() const;

  template <typename U>
  BasicParamSet<U> cast() const {
    BasicParamSet<U> out;
    for (const Entry& e : entries_) out.add(e.name, e.value.template cast<U>(), e.meta_mask);
    return out;
  }

  bool operator==(const BasicParamSet& other) const;

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

using ParamSet = BasicParamSet<float>;

/// Which entries of a bound ParamSet become differentiable tape variables.
enum class GradScope { kAll, kMetaMasked, kNone };

/// Registers every ParamSet entry as a leaf on a tape.
template <typename T>
class ParamBinding {
 public:
  ParamBinding(Tape<T>& tape, const BasicParamSet<T>& params, GradScope scope = GradScope::kAll);

  Var operator[](std::string_view name) const;
  bool contains(std::string_view name) const { return params_->contains(name); }

  /// Gradients after tape.backward(); entries without gradient are zero.
  BasicParamSet<T> gradients(const Tape<T>& tape) const;

 private:
  const BasicParamSet<T>* params_;
  std::vector<Var> vars_;
};

/// params[i] -= lr * grads[i] for entries with meta_mask set.
template <typename T>
void masked_sgd_step(BasicParamSet<T>& params, const BasicParamSet<T>& grads, T lr);

/// acc += w * other, entry by entry.
template <typename T>
void axpy(BasicParamSet<T>& acc, const BasicParamSet<T>& other, T w);

extern template class BasicParamSet<float>;
extern template class BasicParamSet<double>;
extern template class ParamBinding<float>;
extern template class ParamBinding<double>;

}  // namespace mrda::nn
