#include "wavesim/ingest.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>

#include "wavesim/errors.hpp"
#include "wavesim/parallel.hpp"

namespace fs = std::filesystem;

namespace wavesim {

namespace {

std::vector<std::uint8_t> read_file(const fs::path& file) {
  if (!fs::exists(file)) throw UsageError("dataset not found: " + file.string());
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot open " + file.string());
  std::vector<std::uint8_t> bytes(fs::file_size(file));
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!in) throw DataError("short read on " + file.string());
  return bytes;
}

std::vector<std::string> read_names(const fs::path& file, std::size_t expected, const std::vector<std::string>& fallback) {
  std::ifstream in(file);
  if (!in) return fallback;
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    if (!line.empty()) names.push_back(line);
  }
  return names.size() == expected ? names : fallback;
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

// Appends the records of one CIFAR binary file. `label_offset` selects which
// leading byte holds the label; `header` is the number of leading label bytes.
void append_cifar_records(const fs::path& file, std::size_t record_bytes, std::size_t header, std::size_t label_offset,
                          int label_limit, LabeledDataset& out) {
  const auto bytes = read_file(file);
  if (bytes.empty() || bytes.size() % record_bytes != 0) {
    throw DataError("malformed dataset file " + file.string() + ": size " + std::to_string(bytes.size()) +
                    " is not a positive multiple of " + std::to_string(record_bytes));
  }
  const std::size_t records = bytes.size() / record_bytes;
  const std::size_t first = out.images.size();
  out.images.resize(first + records);
  out.labels.resize(first + records);
  out.source_ids.resize(first + records);
  for (std::size_t r = 0; r < records; ++r) {
    const std::uint8_t* rec = bytes.data() + r * record_bytes;
    const int label = rec[label_offset];
    if (label >= label_limit) {
      throw DataError("corrupt record " + std::to_string(r) + " in " + file.string() + ": label " +
                      std::to_string(label) + " exceeds " + std::to_string(label_limit - 1));
    }
    ImageTensor img(32, 32, 3);
    for (std::size_t k = 0; k < 3 * 1024; ++k) img.pixels[k] = static_cast<float>(rec[header + k]) / 255.0f;
    out.images[first + r] = std::move(img);
    out.labels[first + r] = label;
    out.source_ids[first + r] = std::to_string(first + r);
  }
}

bool has_png_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png";
}

}  // namespace

const std::vector<std::string>& cifar10_class_names() {
  static const std::vector<std::string> names{"airplane", "automobile", "bird",  "cat",  "deer",
                                              "dog",      "frog",       "horse", "ship", "truck"};
  return names;
}

const std::vector<std::string>& cifar100_fine_class_names() {
  static const std::vector<std::string> names{
      "apple",        "aquarium_fish", "baby",       "bear",       "beaver",      "bed",        "bee",
      "beetle",       "bicycle",       "bottle",     "bowl",       "boy",         "bridge",     "bus",
      "butterfly",    "camel",         "can",        "castle",     "caterpillar", "cattle",     "chair",
      "chimpanzee",   "clock",         "cloud",      "cockroach",  "couch",       "crab",       "crocodile",
      "cup",          "dinosaur",      "dolphin",    "elephant",   "flatfish",    "forest",     "fox",
      "girl",         "hamster",       "house",      "kangaroo",   "keyboard",    "lamp",       "lawn_mower",
      "leopard",      "lion",          "lizard",     "lobster",    "man",         "maple_tree", "motorcycle",
      "mountain",     "mouse",         "mushroom",   "oak_tree",   "orange",      "orchid",     "otter",
      "palm_tree",    "pear",          "pickup_truck", "pine_tree", "plain",      "plate",      "poppy",
      "porcupine",    "possum",        "rabbit",     "raccoon",    "ray",         "road",       "rocket",
      "rose",         "sea",           "seal",       "shark",      "shrew",       "skunk",      "skyscraper",
      "snail",        "snake",         "spider",     "squirrel",   "streetcar",   "sunflower",  "sweet_pepper",
      "table",        "tank",          "telephone",  "television", "tiger",       "tractor",    "train",
      "trout",        "tulip",         "turtle",     "wardrobe",   "whale",       "willow_tree", "wolf",
      "woman",        "worm"};
  return names;
}

const std::vector<std::string>& cifar100_coarse_class_names() {
  static const std::vector<std::string> names{"aquatic_mammals",
                                              "fish",
                                              "flowers",
                                              "food_containers",
                                              "fruit_and_vegetables",
                                              "household_electrical_devices",
                                              "household_furniture",
                                              "insects",
                                              "large_carnivores",
                                              "large_man-made_outdoor_things",
                                              "large_natural_outdoor_scenes",
                                              "large_omnivores_and_herbivores",
                                              "medium_mammals",
                                              "non-insect_invertebrates",
                                              "people",
                                              "reptiles",
                                              "small_mammals",
                                              "trees",
                                              "vehicles_1",
                                              "vehicles_2"};
  return names;
}

LabeledDataset load_cifar10_files(std::span<const fs::path> files) {
  LabeledDataset out;
  for (const auto& file : files) append_cifar_records(file, kCifar10RecordBytes, 1, 0, 10, out);
  out.class_names = cifar10_class_names();
  if (!files.empty()) {
    out.class_names = read_names(files.front().parent_path() / "batches.meta.txt", 10, cifar10_class_names());
  }
  return out;
}

LabeledDataset load_cifar10(const fs::path& directory, Split split) {
  if (!fs::is_directory(directory)) throw UsageError("dataset not found: " + directory.string());
  std::vector<fs::path> files;
  if (split == Split::train) {
    for (int b = 1; b <= 5; ++b) {
      fs::path f = directory / ("data_batch_" + std::to_string(b) + ".bin");
      if (fs::exists(f)) files.push_back(f);
    }
  } else if (fs::exists(directory / "test_batch.bin")) {
    files.push_back(directory / "test_batch.bin");
  }
  if (files.empty()) throw UsageError("dataset not found: no CIFAR-10 batch files in " + directory.string());
  return load_cifar10_files(files);
}

LabeledDataset load_cifar100_file(const fs::path& file, LabelMode mode) {
  LabeledDataset out;
  const bool fine = mode == LabelMode::fine;
  append_cifar_records(file, kCifar100RecordBytes, 2, fine ? 1 : 0, fine ? 100 : 20, out);
  if (fine) {
    out.class_names = read_names(file.parent_path() / "fine_label_names.txt", 100, cifar100_fine_class_names());
  } else {
    out.class_names = read_names(file.parent_path() / "coarse_label_names.txt", 20, cifar100_coarse_class_names());
  }
  return out;
}

LabeledDataset load_cifar100(const fs::path& directory, Split split, LabelMode mode) {
  if (!fs::is_directory(directory)) throw UsageError("dataset not found: " + directory.string());
  return load_cifar100_file(directory / (split == Split::train ? "train.bin" : "test.bin"), mode);
}

LabeledDataset load_mnist(const fs::path& images_path, const fs::path& labels_path) {
  const auto images = read_file(images_path);
  const auto labels = read_file(labels_path);
  if (images.size() < 16 || read_be32(images, 0) != 0x00000803) {
    throw DataError("format error: " + images_path.string() + " is not an IDX image file (magic 0x00000803)");
  }
  if (labels.size() < 8 || read_be32(labels, 0) != 0x00000801) {
    throw DataError("format error: " + labels_path.string() + " is not an IDX label file (magic 0x00000801)");
  }
  const std::size_t count = read_be32(images, 4);
  const int rows = static_cast<int>(read_be32(images, 8));
  const int cols = static_cast<int>(read_be32(images, 12));
  const std::size_t label_count = read_be32(labels, 4);
  if (count != label_count) {
    throw DataError("inconsistent MNIST files: " + std::to_string(count) + " images but " +
                    std::to_string(label_count) + " labels");
  }
  const std::size_t pixels = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  if (rows <= 0 || cols <= 0 || images.size() != 16 + count * pixels) {
    throw DataError("malformed dataset file " + images_path.string() + ": size does not match header");
  }
  if (labels.size() != 8 + count) {
    throw DataError("malformed dataset file " + labels_path.string() + ": size does not match header");
  }

  LabeledDataset out;
  out.images.resize(count);
  out.labels.resize(count);
  out.source_ids.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int label = labels[8 + i];
    if (label > 9) {
      throw DataError("corrupt record " + std::to_string(i) + " in " + labels_path.string() + ": label " +
                      std::to_string(label));
    }
    ImageTensor img(rows, cols, 1);
    const std::uint8_t* src = images.data() + 16 + i * pixels;
    for (std::size_t k = 0; k < pixels; ++k) img.pixels[k] = static_cast<float>(src[k]) / 255.0f;
    out.images[i] = std::move(img);
    out.labels[i] = label;
    out.source_ids[i] = std::to_string(i);
  }
  for (int c = 0; c < 10; ++c) out.class_names.push_back(std::to_string(c));
  return out;
}

LabeledDataset load_mnist_dir(const fs::path& directory, Split split) {
  if (!fs::is_directory(directory)) throw UsageError("dataset not found: " + directory.string());
  const std::string prefix = split == Split::train ? "train" : "t10k";
  return load_mnist(directory / (prefix + "-images-idx3-ubyte"), directory / (prefix + "-labels-idx1-ubyte"));
}

ImageTensor decode_png(const fs::path& file) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, file.string().c_str())) {
    throw DataError("cannot decode " + file.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw DataError("cannot decode " + file.string() + ": " + message);
  }
  const int h = static_cast<int>(image.height);
  const int w = static_cast<int>(image.width);
  ImageTensor out(h, w, 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        out.at(c, y, x) = static_cast<float>(buffer[(static_cast<std::size_t>(y) * w + x) * 3 + c]) / 255.0f;
      }
    }
  }
  return out;
}

LabeledDataset load_image_dir(const fs::path& root, int target_height, int target_width) {
  if (!fs::is_directory(root)) throw UsageError("dataset not found: " + root.string());
  if (target_height <= 0 || target_width <= 0) throw UsageError("target image size must be positive");

  std::vector<std::string> classes;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) classes.push_back(entry.path().filename().string());
  }
  std::sort(classes.begin(), classes.end());
  if (classes.empty()) throw DataError("no class subdirectories in " + root.string());

  struct Entry {
    std::string relative;
    int label;
  };
  std::vector<Entry> entries;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    std::size_t found = 0;
    for (const auto& file : fs::directory_iterator(root / classes[c])) {
      if (!file.is_regular_file() || !has_png_extension(file.path())) continue;
      entries.push_back({fs::relative(file.path(), root).generic_string(), static_cast<int>(c)});
      ++found;
    }
    if (found == 0) throw DataError("empty class directory " + (root / classes[c]).string());
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.relative < b.relative; });

  std::vector<std::optional<ImageTensor>> decoded(entries.size());
  std::vector<std::string> failures(entries.size());
  parallel_for(0, entries.size(), [&](std::size_t i) {
    try {
      decoded[i] = resize_bilinear(decode_png(root / entries[i].relative), target_height, target_width);
    } catch (const Error& e) {
      failures[i] = e.what();
    }
  });

  LabeledDataset out;
  out.class_names = classes;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!decoded[i]) {
      out.warnings.push_back("skipped " + entries[i].relative + ": " + failures[i]);
      continue;
    }
    out.images.push_back(std::move(*decoded[i]));
    out.labels.push_back(entries[i].label);
    out.source_ids.push_back(entries[i].relative);
  }
  return out;
}

ImageTensor to_grayscale(const ImageTensor& image) {
  if (image.channels == 1) return image;
  ImageTensor out(image.height, image.width, 1);
  const auto r = image.plane(0);
  const auto g = image.plane(1);
  const auto b = image.plane(2);
  for (std::size_t k = 0; k < out.pixels.size(); ++k) {
    const double y = 0.299 * r[k] + 0.587 * g[k] + 0.114 * b[k];
    out.pixels[k] = static_cast<float>(std::clamp(y, 0.0, 1.0));
  }
  return out;
}

ImageTensor resize_bilinear(const ImageTensor& image, int target_height, int target_width) {
  if (target_height <= 0 || target_width <= 0) throw UsageError("target image size must be positive");
  if (target_height == image.height && target_width == image.width) return image;

  const auto source_coord = [](int i, int out_size, int in_size) {
    return out_size == 1 ? 0.0 : static_cast<double>(i) * (in_size - 1) / (out_size - 1);
  };
  ImageTensor out(target_height, target_width, image.channels);
  for (int c = 0; c < image.channels; ++c) {
    for (int y = 0; y < target_height; ++y) {
      const double sy = source_coord(y, target_height, image.height);
      const int y0 = std::min(static_cast<int>(std::floor(sy)), image.height - 1);
      const int y1 = std::min(y0 + 1, image.height - 1);
      const double fy = sy - y0;
      for (int x = 0; x < target_width; ++x) {
        const double sx = source_coord(x, target_width, image.width);
        const int x0 = std::min(static_cast<int>(std::floor(sx)), image.width - 1);
        const int x1 = std::min(x0 + 1, image.width - 1);
        const double fx = sx - x0;
        const double top = (1 - fx) * image.at(c, y0, x0) + fx * image.at(c, y0, x1);
        const double bottom = (1 - fx) * image.at(c, y1, x0) + fx * image.at(c, y1, x1);
        out.at(c, y, x) = static_cast<float>(std::clamp((1 - fy) * top + fy * bottom, 0.0, 1.0));
      }
    }
  }
  return out;
}

}  // namespace wavesim
