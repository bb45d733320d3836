#include "mrda/kernels.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mrda {
namespace {

void check_size(int size) {
  if (size < 1 || size % 2 == 0) throw std::invalid_argument("kernel size must be odd and positive");
}

void normalize(BlurKernel& k) {
  const double s = k.sum();
  for (double& w : k.weights) w /= s;
}

}  // namespace

double BlurKernel::sum() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

std::string kind_name(KernelSpec::Kind kind) {
  switch (kind) {
    case KernelSpec::Kind::kDelta:
      return "delta";
    case KernelSpec::Kind::kIsotropic:
      return "isotropic";
    case KernelSpec::Kind::kAnisotropic:
      return "anisotropic";
  }
  return "delta";
}

KernelSpec::Kind parse_kind(const std::string& name) {
  if (name == "delta") return KernelSpec::Kind::kDelta;
  if (name == "isotropic") return KernelSpec::Kind::kIsotropic;
  if (name == "anisotropic") return KernelSpec::Kind::kAnisotropic;
  throw std::invalid_argument("unknown kernel kind '" + name + "'");
}

BlurKernel make_delta_kernel(int size) {
  check_size(size);
  BlurKernel k{size, std::vector<double>(static_cast<std::size_t>(size) * size, 0.0)};
  k.weights[static_cast<std::size_t>(size / 2) * size + size / 2] = 1.0;
  return k;
}

BlurKernel make_isotropic_kernel(double sigma, int size) {
  check_size(size);
  if (!(sigma > 0.0)) throw std::invalid_argument("isotropic kernel width must be positive");
  BlurKernel k{size, std::vector<double>(static_cast<std::size_t>(size) * size)};
  const int c = size / 2;
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      const double y = i - c, x = j - c;
      k.weights[static_cast<std::size_t>(i) * size + j] = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
    }
  }
  normalize(k);
  return k;
}

BlurKernel make_anisotropic_kernel(double lambda1, double lambda2, double theta, int size) {
  check_size(size);
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) throw std::invalid_argument("anisotropic eigenvalues must be positive");
  const double ct = std::cos(theta), st = std::sin(theta);
  // inverse covariance R diag(1/l1, 1/l2) R^T
  const double a = ct * ct / lambda1 + st * st / lambda2;
  const double b = ct * st / lambda1 - ct * st / lambda2;
  const double d = st * st / lambda1 + ct * ct / lambda2;
  BlurKernel k{size, std::vector<double>(static_cast<std::size_t>(size) * size)};
  const int c = size / 2;
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      const double y = i - c, x = j - c;
      const double q = a * x * x + 2.0 * b * x * y + d * y * y;
      k.weights[static_cast<std::size_t>(i) * size + j] = std::exp(-0.5 * q);
    }
  }
  normalize(k);
  return k;
}

BlurKernel make_kernel(const KernelSpec& spec, int size) {
  switch (spec.kind) {
    case KernelSpec::Kind::kDelta:
      return make_delta_kernel(size);
    case KernelSpec::Kind::kIsotropic:
      return make_isotropic_kernel(spec.sigma, size);
    case KernelSpec::Kind::kAnisotropic:
      return make_anisotropic_kernel(spec.lambda1, spec.lambda2, spec.theta, size);
  }
  throw std::invalid_argument("unknown kernel kind");
}

WidthRange gaussian8_range(int scale) {
  switch (scale) {
    case 2:
      return {0.8, 1.6};
    case 4:
      return {1.8, 3.2};
    default:
      throw std::invalid_argument("Gaussian8 suite defined for scale 2 or 4, got " + std::to_string(scale));
  }
}

std::vector<KernelSpec> gaussian8_suite(int scale) { return gaussian8_suite(gaussian8_range(scale)); }

std::vector<KernelSpec> gaussian8_suite(WidthRange range) {
  if (!(range.lo > 0.0) || range.hi < range.lo) throw std::invalid_argument("invalid Gaussian8 width range");
  std::vector<KernelSpec> out;
  for (int i = 0; i < 8; ++i) out.push_back(KernelSpec::isotropic(range.lo + (range.hi - range.lo) * i / 7.0));
  return out;
}

}  // namespace mrda
