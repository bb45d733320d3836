#include "mrda/nn/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace mrda::nn {

Adam::Adam(const ParamSet& like, AdamOptions options) : options_(options) {
  for (const auto& e : like) {
    m_.emplace_back(e.value.numel(), 0.0);
    v_.emplace_back(e.value.numel(), 0.0);
  }
}

void Adam::step(ParamSet& params, const ParamSet& grads, UpdateScope scope) {
  if (params.size() != m_.size() || !params.same_structure(grads)) {
    throw std::invalid_argument("Adam::step: parameter structure does not match optimizer state");
  }
  ++step_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (scope == UpdateScope::kMetaMasked && !params.entry(i).meta_mask) continue;
    auto p = params.values(i);
    const auto& g = grads.entry(i).value;
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double gk = g[k];
      m[k] = b1 * m[k] + (1.0 - b1) * gk;
      v[k] = b2 * v[k] + (1.0 - b2) * gk * gk;
      const double mhat = m[k] / c1;
      const double vhat = v[k] / c2;
      p[k] = static_cast<float>(p[k] - options_.lr * mhat / (std::sqrt(vhat) + options_.eps));
    }
  }
}

double lr_schedule(long t, double base, long halve_every) {
  if (base <= 0.0) throw std::invalid_argument("lr_schedule: base learning rate must be positive");
  if (halve_every <= 0 || t < 0) return base;
  return base * std::pow(0.5, static_cast<double>(t / halve_every));
}

}  // namespace mrda::nn
