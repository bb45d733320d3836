#pragma once

#include <vector>

#include "mrda/nn/param_set.hpp"

namespace mrda::nn {

struct AdamOptions {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

enum class UpdateScope { kAll, kMetaMasked };

class Adam {
 public:
  Adam(const ParamSet& like, AdamOptions options);

  /// One update. Entries outside `scope` are left bitwise untouched and
  /// their moment estimates are not advanced.
  void step(ParamSet& params, const ParamSet& grads, UpdateScope scope = UpdateScope::kAll);

  void set_lr(double lr) { options_.lr = lr; }
  double lr() const { return options_.lr; }
  long steps() const { return step_; }

 private:
  AdamOptions options_;
  long step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

/// base * 0.5^floor(t / halve_every).
double lr_schedule(long t, double base, long halve_every);

}  // namespace mrda::nn
