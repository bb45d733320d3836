#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "mrda/nn/tape.hpp"

namespace mrda::nn {

/// Relative error is |analytic - numeric| / max(|analytic|, |numeric|, kGradCheckFloor).
inline constexpr double kGradCheckFloor = 1e-6;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t worst_input = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Builds a scalar on a fresh tape from the given input variables.
using ScalarFn = std::function<Var(Tape<double>&, std::span<const Var>)>;

/// Compares reverse-mode gradients of `fn` w.r.t. every input against central
/// differences with step `epsilon`. When `max_per_input` is non-zero, only
/// that many evenly spaced elements of each input are probed.
GradCheckResult grad_check(const ScalarFn& fn, const std::vector<Tensor<double>>& inputs, double epsilon = 1e-6,
                           std::size_t max_per_input = 0);

}  // namespace mrda::nn
