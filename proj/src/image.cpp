#include "wavesim/image.hpp"

#include <algorithm>
#include <unordered_set>

#include "wavesim/errors.hpp"

namespace wavesim {

ImageTensor::ImageTensor(int h, int w, int c) : height(h), width(w), channels(c) {
  if (h <= 0 || w <= 0 || (c != 1 && c != 3)) {
    throw UsageError("image shape must be positive with 1 or 3 channels, got " + std::to_string(h) + "x" +
                     std::to_string(w) + "x" + std::to_string(c));
  }
  pixels.assign(static_cast<std::size_t>(h) * w * c, 0.0f);
}

std::span<const float> ImageTensor::plane(int channel) const {
  return std::span<const float>(pixels).subspan(static_cast<std::size_t>(channel) * plane_size(), plane_size());
}

std::span<float> ImageTensor::plane(int channel) {
  return std::span<float>(pixels).subspan(static_cast<std::size_t>(channel) * plane_size(), plane_size());
}

void ImageTensor::validate() const {
  if (height <= 0 || width <= 0 || (channels != 1 && channels != 3)) throw UsageError("invalid image shape");
  if (pixels.size() != plane_size() * static_cast<std::size_t>(channels)) {
    throw UsageError("pixel count does not match image shape");
  }
  for (float p : pixels) {
    if (!(p >= 0.0f && p <= 1.0f)) throw UsageError("pixel value outside [0,1]");
  }
}

void LabeledDataset::validate() const {
  if (labels.size() != images.size() || source_ids.size() != images.size()) {
    throw DataError("dataset arrays have inconsistent lengths");
  }
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (!images[i].same_shape(images.front())) {
      throw DataError("image " + source_ids[i] + " has a different shape from the first image");
    }
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= class_names.size()) {
      throw DataError("label of image " + source_ids[i] + " is outside the class list");
    }
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : source_ids) {
    if (!seen.insert(id).second) throw DataError("duplicate source id " + id);
  }
}

LabeledDataset LabeledDataset::filter_label(int label) const {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) keep.push_back(i);
  }
  return subset(keep);
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.class_names = class_names;
  out.warnings = warnings;
  out.images.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= images.size()) throw UsageError("subset index out of range");
    out.images.push_back(images[i]);
    out.labels.push_back(labels[i]);
    out.source_ids.push_back(source_ids[i]);
  }
  return out;
}

int LabeledDataset::class_index(const std::string& name) const {
  auto it = std::find(class_names.begin(), class_names.end(), name);
  return it == class_names.end() ? -1 : static_cast<int>(it - class_names.begin());
}

}  // namespace wavesim
