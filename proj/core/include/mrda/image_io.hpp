#pragma once

#include <filesystem>
#include <vector>

#include "mrda/image.hpp"

namespace mrda {

/// Reads an 8- or 16-bit PNG (or any format OpenCV decodes) as RGB in [0,1].
ImageTensor read_image(const std::filesystem::path& path);
/// Writes an 8-bit PNG; values are clipped and rounded.
void write_png(const std::filesystem::path& path, const ImageTensor& img);

/// Baseline JPEG encode/decode at `quality` (1..100). Output is quantized to 8 bits.
ImageTensor jpeg_roundtrip(const ImageTensor& img, int quality);

/// Every decodable image file in `dir`, sorted by file name.
std::vector<ImageTensor> read_image_dir(const std::filesystem::path& dir);

}  // namespace mrda
