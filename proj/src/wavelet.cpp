#include "wavesim/wavelet.hpp"

#include <cmath>

#include "wavesim/errors.hpp"
#include "wavesim/parallel.hpp"

namespace wavesim {

namespace {

std::vector<double> quadrature_mirror(const std::vector<double>& lowpass) {
  const std::size_t n = lowpass.size();
  std::vector<double> highpass(n);
  for (std::size_t k = 0; k < n; ++k) highpass[k] = (k % 2 == 0 ? 1.0 : -1.0) * lowpass[n - 1 - k];
  return highpass;
}

// One periodized analysis step over `n` samples read with `stride`.
// Lowpass output goes to the first n/2 slots, highpass to the next n/2.
void analyze(double* data, std::size_t n, std::size_t stride, const WaveletBasis& basis, std::vector<double>& scratch) {
  const std::size_t half = n / 2;
  scratch.assign(n, 0.0);
  const std::size_t taps = basis.lowpass.size();
  for (std::size_t i = 0; i < half; ++i) {
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t k = 0; k < taps; ++k) {
      const double x = data[((2 * i + k) % n) * stride];
      lo += basis.lowpass[k] * x;
      hi += basis.highpass[k] * x;
    }
    scratch[i] = lo;
    scratch[half + i] = hi;
  }
  for (std::size_t i = 0; i < n; ++i) data[i * stride] = scratch[i];
}

// Transpose of analyze.
void synthesize(double* data, std::size_t n, std::size_t stride, const WaveletBasis& basis, std::vector<double>& scratch) {
  const std::size_t half = n / 2;
  scratch.assign(n, 0.0);
  const std::size_t taps = basis.lowpass.size();
  for (std::size_t i = 0; i < half; ++i) {
    const double lo = data[i * stride];
    const double hi = data[(half + i) * stride];
    for (std::size_t k = 0; k < taps; ++k) {
      scratch[(2 * i + k) % n] += basis.lowpass[k] * lo + basis.highpass[k] * hi;
    }
  }
  for (std::size_t i = 0; i < n; ++i) data[i * stride] = scratch[i];
}

std::size_t band_offset(const WaveletCoefficients& c, int level, int band_index) {
  const auto size_at = [&](int j) {
    return static_cast<std::size_t>(c.height >> j) * static_cast<std::size_t>(c.width >> j);
  };
  std::size_t offset = size_at(c.levels);
  for (int j = c.levels; j > level; --j) offset += 3 * size_at(j);
  return offset + static_cast<std::size_t>(band_index) * size_at(level);
}

// Moves between the in-place Mallat layout of an HxW grid and the canonical
// vector order. `to_vector` selects the direction.
void reorder(std::vector<double>& grid, std::vector<double>& vec, int height, int width, int levels, bool to_vector) {
  std::size_t pos = 0;
  const auto copy_block = [&](int row0, int col0, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        double& g = grid[static_cast<std::size_t>(row0 + r) * width + col0 + c];
        if (to_vector) {
          vec[pos++] = g;
        } else {
          g = vec[pos++];
        }
      }
    }
  };
  copy_block(0, 0, height >> levels, width >> levels);
  for (int j = levels; j >= 1; --j) {
    const int bh = height >> j;
    const int bw = width >> j;
    copy_block(0, bw, bh, bw);   // LH
    copy_block(bh, 0, bh, bw);   // HL
    copy_block(bh, bw, bh, bw);  // HH
  }
}

}  // namespace

std::string to_string(BasisName name) { return name == BasisName::haar ? "haar" : "db2"; }

BasisName parse_basis(const std::string& text) {
  if (text == "haar") return BasisName::haar;
  if (text == "db2") return BasisName::db2;
  throw UsageError("unknown wavelet basis '" + text + "' (expected haar or db2)");
}

WaveletBasis WaveletBasis::haar() {
  const double s = 1.0 / std::sqrt(2.0);
  WaveletBasis b;
  b.name = BasisName::haar;
  b.lowpass = {s, s};
  b.highpass = quadrature_mirror(b.lowpass);
  return b;
}

WaveletBasis WaveletBasis::db2() {
  const double r3 = std::sqrt(3.0);
  const double norm = 4.0 * std::sqrt(2.0);
  WaveletBasis b;
  b.name = BasisName::db2;
  b.lowpass = {(1 + r3) / norm, (3 + r3) / norm, (3 - r3) / norm, (1 - r3) / norm};
  b.highpass = quadrature_mirror(b.lowpass);
  return b;
}

WaveletBasis WaveletBasis::from_name(BasisName name) { return name == BasisName::haar ? haar() : db2(); }

std::span<const double> WaveletCoefficients::approximation() const {
  return std::span<const double>(values).first(static_cast<std::size_t>(height >> levels) *
                                               static_cast<std::size_t>(width >> levels));
}

std::span<const double> WaveletCoefficients::detail(int level, Subband band) const {
  if (level < 1 || level > levels) throw UsageError("detail level out of range");
  const std::size_t size = static_cast<std::size_t>(band_height(level)) * static_cast<std::size_t>(band_width(level));
  return std::span<const double>(values).subspan(band_offset(*this, level, static_cast<int>(band)), size);
}

int effective_levels(int height, int width, int requested) {
  int levels = 0;
  while (levels < requested && height % 2 == 0 && width % 2 == 0 && height > 0 && width > 0) {
    height /= 2;
    width /= 2;
    ++levels;
  }
  return levels;
}

WaveletCoefficients dwt2(std::span<const double> plane, int height, int width, const WaveletBasis& basis, int levels) {
  if (levels < 1) throw UsageError("wavelet levels must be at least 1");
  if (height <= 0 || width <= 0 || plane.size() != static_cast<std::size_t>(height) * width) {
    throw UsageError("plane size does not match its declared shape");
  }
  if (height % 2 != 0 || width % 2 != 0) {
    throw UsageError("image dimensions " + std::to_string(height) + "x" + std::to_string(width) +
                     " must be even for a critically sampled transform; pad or crop the images");
  }
  const int depth = effective_levels(height, width, levels);

  std::vector<double> grid(plane.begin(), plane.end());
  std::vector<double> scratch;
  int h = height;
  int w = width;
  for (int level = 0; level < depth; ++level) {
    for (int r = 0; r < h; ++r) analyze(grid.data() + static_cast<std::size_t>(r) * width, w, 1, basis, scratch);
    for (int c = 0; c < w; ++c) analyze(grid.data() + c, h, width, basis, scratch);
    h /= 2;
    w /= 2;
  }

  WaveletCoefficients out;
  out.height = height;
  out.width = width;
  out.levels = depth;
  out.values.resize(grid.size());
  reorder(grid, out.values, height, width, depth, true);
  return out;
}

std::vector<double> idwt2(const WaveletCoefficients& coefficients, const WaveletBasis& basis) {
  const int height = coefficients.height;
  const int width = coefficients.width;
  if (height <= 0 || width <= 0 || coefficients.levels < 1 ||
      coefficients.values.size() != static_cast<std::size_t>(height) * width ||
      effective_levels(height, width, coefficients.levels) != coefficients.levels) {
    throw UsageError("wavelet coefficients do not match their declared shape and levels");
  }
  std::vector<double> grid(coefficients.values.size());
  std::vector<double> vec = coefficients.values;
  reorder(grid, vec, height, width, coefficients.levels, false);

  std::vector<double> scratch;
  for (int level = coefficients.levels; level >= 1; --level) {
    const int h = height >> (level - 1);
    const int w = width >> (level - 1);
    for (int c = 0; c < w; ++c) synthesize(grid.data() + c, h, width, basis, scratch);
    for (int r = 0; r < h; ++r) synthesize(grid.data() + static_cast<std::size_t>(r) * width, w, 1, basis, scratch);
  }
  return grid;
}

std::vector<double> decompose_image(const ImageTensor& image, const WaveletBasis& basis, int levels) {
  std::vector<double> row;
  row.reserve(image.pixels.size());
  std::vector<double> plane(image.plane_size());
  for (int c = 0; c < image.channels; ++c) {
    const auto src = image.plane(c);
    for (std::size_t k = 0; k < plane.size(); ++k) plane[k] = src[k];
    const auto coeffs = dwt2(plane, image.height, image.width, basis, levels);
    row.insert(row.end(), coeffs.values.begin(), coeffs.values.end());
  }
  return row;
}

CoefficientMatrix decompose_dataset(const LabeledDataset& dataset, BasisName basis_name, int levels) {
  const WaveletBasis basis = WaveletBasis::from_name(basis_name);
  CoefficientMatrix out;
  out.basis = basis_name;
  out.image_ids = dataset.source_ids;
  if (dataset.empty()) {
    out.levels = 0;
    return out;
  }
  const ImageTensor& first = dataset.images.front();
  if (levels < 1) throw UsageError("wavelet levels must be at least 1");
  if (first.height % 2 != 0 || first.width % 2 != 0) {
    throw UsageError("image dimensions " + std::to_string(first.height) + "x" + std::to_string(first.width) +
                     " must be even for a critically sampled transform; pad or crop the images");
  }
  for (const auto& img : dataset.images) {
    if (!img.same_shape(first)) throw DataError("images in the dataset do not share one shape");
  }
  out.levels = effective_levels(first.height, first.width, levels);
  const auto n = static_cast<Eigen::Index>(dataset.size());
  const auto d = static_cast<Eigen::Index>(first.pixels.size());
  out.values.resize(n, d);
  parallel_for(0, dataset.size(), [&](std::size_t i) {
    const auto row = decompose_image(dataset.images[i], basis, levels);
    for (Eigen::Index j = 0; j < d; ++j) out.values(static_cast<Eigen::Index>(i), j) = row[static_cast<std::size_t>(j)];
  });
  return out;
}

}  // namespace wavesim
