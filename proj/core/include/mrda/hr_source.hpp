#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mrda/image.hpp"
#include "mrda/rng.hpp"

namespace mrda {

/// Deterministic synthetic RGB image: smooth background, sharp-edged shapes,
/// oriented gratings and a multi-octave texture layer, so blur differences
/// are visible at small sizes.
ImageTensor synth_hr_image(int height, int width, std::uint64_t seed);

/// A pool of HR images that training samples patches from.
class HrSource {
 public:
  explicit HrSource(std::vector<ImageTensor> images);

  /// `count` synthetic size x size images; image i uses stream i of `seed`.
  static HrSource synthetic(int count, int size, std::uint64_t seed);
  static HrSource from_directory(const std::filesystem::path& dir);

  std::size_t size() const { return images_.size(); }
  const ImageTensor& image(std::size_t i) const { return images_.at(i); }

  /// Random patch x patch crop of a random image, with random flips and
  /// quarter turns when `augment` is set.
  ImageTensor sample_patch(int patch, Rng& rng, bool augment = true) const;

 private:
  std::vector<ImageTensor> images_;
};

}  // namespace mrda
