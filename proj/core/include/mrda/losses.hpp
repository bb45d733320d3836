#pragma once

#include <span>

#include "mrda/nn/ops.hpp"

namespace mrda {

/// Mean absolute error over every pixel and channel.
template <typename T>
nn::Var l_rec(nn::Tape<T>& tape, nn::Var sr, nn::Var hr);

/// (1/d) KL(softmax(D_T) || softmax(D_S)) per row, averaged over rows.
/// D_T is detached.
template <typename T>
nn::Var l_kl(nn::Tape<T>& tape, nn::Var d_teacher, nn::Var d_student);

/// (1/d) sum |D_T - D_S| per row, averaged over rows. D_T is detached.
template <typename T>
nn::Var l_abs(nn::Tape<T>& tape, nn::Var d_teacher, nn::Var d_student);

/// l_rec + lambda_kl * l_kl + lambda_abs * l_abs.
template <typename T>
nn::Var l_classic(nn::Tape<T>& tape, nn::Var sr, nn::Var hr, nn::Var d_teacher, nn::Var d_student, T lambda_kl,
                  T lambda_abs);

// Plain evaluations on single vectors.
double l_kl_value(std::span<const double> d_teacher, std::span<const double> d_student);
double l_abs_value(std::span<const double> d_teacher, std::span<const double> d_student);

}  // namespace mrda
