#pragma once

#include "mrda/nn/tape.hpp"

// Differentiable primitives. Feature maps are N x C x H x W; vectors are N x D.
// Every op records itself on the tape and propagates gradients to any input
// that requires them. Shape errors throw std::invalid_argument.

namespace mrda::nn {

/// Cross-correlation with zero padding. w: Cout x Cin x K x K, b: Cout (or invalid Var).
template <typename T>
Var conv2d(Tape<T>& tape, Var x, Var w, Var b, int stride, int padding);

/// Per-(sample, channel) kernels, stride 1, zero "same" padding.
/// w: (N*C) x 1 x Kh x Kw; for a single sample this is C x 1 x Kh x Kw.
template <typename T>
Var depthwise_conv2d(Tape<T>& tape, Var x, Var w);

/// Sub-pixel rearrangement: N x (C*r*r) x H x W -> N x C x rH x rW.
template <typename T>
Var pixel_shuffle(Tape<T>& tape, Var x, int r);

template <typename T>
Var leaky_relu(Tape<T>& tape, Var x, T negative_slope = T(0.1));

template <typename T>
Var sigmoid(Tape<T>& tape, Var x);

template <typename T>
Var add(Tape<T>& tape, Var a, Var b);

/// Elementwise product of equally shaped tensors.
template <typename T>
Var mul(Tape<T>& tape, Var a, Var b);

template <typename T>
Var scale(Tape<T>& tape, Var a, T s);

/// x: N x In, w: Out x In, b: Out (or invalid Var) -> N x Out.
template <typename T>
Var linear(Tape<T>& tape, Var x, Var w, Var b);

/// N x C x H x W -> N x C.
template <typename T>
Var global_avg_pool(Tape<T>& tape, Var x);

template <typename T>
Var reshape(Tape<T>& tape, Var x, Shape shape);

/// Sum of all elements -> shape {1}.
template <typename T>
Var sum(Tape<T>& tape, Var x);

/// Mean of |a - b| over all elements -> shape {1}.
template <typename T>
Var mean_abs_diff(Tape<T>& tape, Var a, Var b);

/// Row-wise KL(softmax(teacher) || softmax(student)), each row scaled by 1/D,
/// averaged over rows. The teacher side never receives gradient.
template <typename T>
Var softmax_kl(Tape<T>& tape, Var teacher_logits, Var student_logits);

/// Copy of x that stops gradient flow.
template <typename T>
Var detach(Tape<T>& tape, Var x);

}  // namespace mrda::nn
