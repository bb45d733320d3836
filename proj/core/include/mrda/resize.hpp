#pragma once

#include <string>

#include "mrda/image.hpp"

namespace mrda {

enum class ResizeMethod { kDecimate, kBicubic, kArea };

std::string resize_method_name(ResizeMethod m);
ResizeMethod parse_resize_method(const std::string& name);

/// Bicubic resampling (a = -0.5) with MATLAB imresize conventions: pixel-center
/// alignment, antialiasing when shrinking, symmetric edge handling. No clipping.
ImageTensor resize_bicubic(const ImageTensor& img, int out_h, int out_w);

/// Mean over each factor x factor block.
ImageTensor resize_area(const ImageTensor& img, int factor);

/// Every factor-th pixel starting at (0, 0).
ImageTensor decimate(const ImageTensor& img, int factor);

/// Integer downscale; dimensions must be divisible by factor.
ImageTensor downscale(const ImageTensor& img, int factor, ResizeMethod method);

}  // namespace mrda
