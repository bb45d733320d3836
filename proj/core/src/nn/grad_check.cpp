#include "mrda/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mrda::nn {
namespace {

double evaluate(const ScalarFn& fn, const std::vector<Tensor<double>>& inputs) {
  Tape<double> tape;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const auto& t : inputs) vars.push_back(tape.constant(t));
  const Var out = fn(tape, vars);
  const auto& v = tape.value(out);
  if (v.numel() != 1) throw std::invalid_argument("grad_check: function must return a scalar");
  return v[0];
}

}  // namespace

GradCheckResult grad_check(const ScalarFn& fn, const std::vector<Tensor<double>>& inputs, double epsilon,
                           std::size_t max_per_input) {
  Tape<double> tape;
  std::vector<Var> vars;
  for (const auto& t : inputs) vars.push_back(tape.variable(t));
  const Var out = fn(tape, vars);
  tape.backward(out);
  std::vector<Tensor<double>> analytic;
  for (Var v : vars) analytic.push_back(tape.grad(v));

  GradCheckResult result;
  std::vector<Tensor<double>> probe = inputs;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const std::size_t n = inputs[i].numel();
    const std::size_t count = (max_per_input == 0) ? n : std::min(n, max_per_input);
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t idx = (count == n) ? k : (k * n) / count;
      const double orig = probe[i][idx];
      probe[i][idx] = orig + epsilon;
      const double fp = evaluate(fn, probe);
      probe[i][idx] = orig - epsilon;
      const double fm = evaluate(fn, probe);
      probe[i][idx] = orig;
      const double numeric = (fp - fm) / (2.0 * epsilon);
      const double a = analytic[i][idx];
      const double denom = std::max({std::abs(a), std::abs(numeric), kGradCheckFloor});
      const double rel = std::abs(a - numeric) / denom;
      ++result.checked;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_input = i;
        result.worst_index = idx;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace mrda::nn
