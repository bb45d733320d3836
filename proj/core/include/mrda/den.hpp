#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mrda/nn/layers.hpp"

namespace mrda {

struct DenConfig {
  int in_channels = 3;  // C' for the teacher, 3 for the student
  int channels = 64;
  int dim = 256;  // d
};

inline constexpr int kDenConvs = 6;

/// Six 3x3 convs (strides 1,2,1,2,1,2) with LeakyReLU, global average
/// pooling, then one linear layer to d. Names: conv<i>.*, fc.*.
struct DenModel {
  DenConfig config;
  nn::ParamSet params;
};

DenModel den_init(const DenConfig& config, std::uint64_t seed);

/// N x in_channels x H x W -> N x d.
template <typename T>
nn::Var den_forward(nn::Tape<T>& tape, const nn::ParamBinding<T>& p, nn::Var x);

nn::Tensor<float> den_forward(const nn::ParamSet& params, const nn::Tensor<float>& x);

/// exp(v_i) / sum_j exp(v_j), with max subtraction.
std::vector<double> softmax_normalize(std::span<const double> v);

/// Copies every entry except the first conv's weight from `src` into `dst`.
/// Throws std::invalid_argument listing any other mismatching entry.
void copy_den_body(const nn::ParamSet& src, nn::ParamSet& dst);

}  // namespace mrda
