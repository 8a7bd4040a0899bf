#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "wavesim/image.hpp"

namespace wavesim {

enum class Split { train, test };
enum class LabelMode { coarse, fine };

inline constexpr std::size_t kCifar10RecordBytes = 1 + 3 * 1024;
inline constexpr std::size_t kCifar100RecordBytes = 2 + 3 * 1024;

/// Reads CIFAR-10 binary batches (label byte + R, G, B planes of 32x32).
/// Class names come from batches.meta.txt when present.
LabeledDataset load_cifar10(const std::filesystem::path& directory, Split split);
LabeledDataset load_cifar10_files(std::span<const std::filesystem::path> files);

/// Reads train.bin / test.bin of the CIFAR-100 binary distribution.
/// Class names come from {fine,coarse}_label_names.txt when present.
LabeledDataset load_cifar100(const std::filesystem::path& directory, Split split, LabelMode mode);
LabeledDataset load_cifar100_file(const std::filesystem::path& file, LabelMode mode);

/// Reads an IDX image file (magic 0x803) and its IDX label file (magic 0x801).
LabeledDataset load_mnist(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);
/// Canonical file names inside `directory` for the given split.
LabeledDataset load_mnist_dir(const std::filesystem::path& directory, Split split);

/// One subdirectory per class (lexicographic order gives the class index),
/// PNG files inside. Images become 3-channel and are resized bilinearly.
/// Undecodable files are skipped with an entry in `warnings`.
LabeledDataset load_image_dir(const std::filesystem::path& root, int target_height, int target_width);

/// Decodes one PNG into a 3-channel tensor. Throws DataError on failure.
ImageTensor decode_png(const std::filesystem::path& file);

/// BT.601 luma for 3-channel input; identity for 1 channel.
ImageTensor to_grayscale(const ImageTensor& image);

/// Bilinear resize with corner-aligned sampling: output corners coincide
/// with input corners, so an equal-size resize is the identity.
ImageTensor resize_bilinear(const ImageTensor& image, int target_height, int target_width);

const std::vector<std::string>& cifar10_class_names();
const std::vector<std::string>& cifar100_fine_class_names();
const std::vector<std::string>& cifar100_coarse_class_names();

}  // namespace wavesim
