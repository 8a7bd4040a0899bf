#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace wavesim {

/// One image as a normalized pixel grid. Pixels are stored channel-planar:
/// all of channel 0 in row-major order, then channel 1, and so on. Values are
/// kept in single precision; every kernel promotes to double.
struct ImageTensor {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> pixels;

  ImageTensor() = default;
  ImageTensor(int h, int w, int c);

  std::size_t plane_size() const { return static_cast<std::size_t>(height) * static_cast<std::size_t>(width); }
  std::span<const float> plane(int channel) const;
  std::span<float> plane(int channel);

  float at(int channel, int row, int col) const {
    return pixels[static_cast<std::size_t>(channel) * plane_size() + static_cast<std::size_t>(row) * width + col];
  }
  float& at(int channel, int row, int col) {
    return pixels[static_cast<std::size_t>(channel) * plane_size() + static_cast<std::size_t>(row) * width + col];
  }

  bool same_shape(const ImageTensor& other) const {
    return height == other.height && width == other.width && channels == other.channels;
  }

  /// Throws UsageError when the shape is inconsistent or a pixel leaves [0,1].
  void validate() const;

  bool operator==(const ImageTensor&) const = default;
};

/// Ordered images with integer labels. `warnings` collects non-fatal
/// problems met while loading (for example skipped undecodable files).
struct LabeledDataset {
  std::vector<ImageTensor> images;
  std::vector<int> labels;
  std::vector<std::string> class_names;
  std::vector<std::string> source_ids;
  std::vector<std::string> warnings;

  std::size_t size() const { return images.size(); }
  bool empty() const { return images.empty(); }

  /// Uniform shape, label ranges, unique ids. Throws DataError on violation.
  void validate() const;

  /// Images whose label equals `label`, order preserved.
  LabeledDataset filter_label(int label) const;
  LabeledDataset subset(std::span<const std::size_t> indices) const;

  /// Index of a class name, or -1.
  int class_index(const std::string& name) const;

  bool operator==(const LabeledDataset&) const = default;
};

}  // namespace wavesim
