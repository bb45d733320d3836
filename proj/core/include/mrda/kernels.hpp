#pragma once

#include <string>
#include <vector>

namespace mrda {

/// Square, odd-sized, nonnegative blur kernel summing to 1.
struct BlurKernel {
  int size = 1;
  std::vector<double> weights{1.0};

  double operator()(int i, int j) const { return weights[static_cast<std::size_t>(i) * size + j]; }
  double sum() const;
};

struct KernelSpec {
  enum class Kind { kDelta, kIsotropic, kAnisotropic };
  Kind kind = Kind::kDelta;
  double sigma = 0.0;    // isotropic width
  double lambda1 = 0.0;  // anisotropic eigenvalues (variances)
  double lambda2 = 0.0;
  double theta = 0.0;  // rotation in [0, pi)

  static KernelSpec delta() { return {}; }
  static KernelSpec isotropic(double sigma) { return {Kind::kIsotropic, sigma, 0.0, 0.0, 0.0}; }
  static KernelSpec anisotropic(double l1, double l2, double theta) {
    return {Kind::kAnisotropic, 0.0, l1, l2, theta};
  }

  bool operator==(const KernelSpec&) const = default;
};

std::string kind_name(KernelSpec::Kind kind);
KernelSpec::Kind parse_kind(const std::string& name);

inline constexpr int kDefaultKernelSize = 21;

BlurKernel make_delta_kernel(int size = kDefaultKernelSize);
/// Gaussian exp(-(x^2 + y^2) / (2 sigma^2)) on the integer grid, normalized.
BlurKernel make_isotropic_kernel(double sigma, int size = kDefaultKernelSize);
/// exp(-v^T S^-1 v / 2) with S = R(theta) diag(l1, l2) R(theta)^T and v = (x, y),
/// x along columns, y along rows; normalized.
BlurKernel make_anisotropic_kernel(double lambda1, double lambda2, double theta, int size = kDefaultKernelSize);
BlurKernel make_kernel(const KernelSpec& spec, int size = kDefaultKernelSize);

struct WidthRange {
  double lo;
  double hi;
};

/// Default test-width range per scale: [0.8, 1.6] for x2, [1.8, 3.2] for x4.
WidthRange gaussian8_range(int scale);
/// Eight isotropic kernels with evenly spaced widths over the range.
std::vector<KernelSpec> gaussian8_suite(int scale);
std::vector<KernelSpec> gaussian8_suite(WidthRange range);

}  // namespace mrda
