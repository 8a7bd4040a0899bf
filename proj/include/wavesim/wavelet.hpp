#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "wavesim/image.hpp"

namespace wavesim {

enum class BasisName { haar, db2 };

std::string to_string(BasisName name);
BasisName parse_basis(const std::string& text);

/// Orthonormal two-channel filter bank. The highpass filter is the
/// quadrature mirror of the lowpass: g[k] = (-1)^k h[L-1-k].
struct WaveletBasis {
  BasisName name = BasisName::haar;
  std::vector<double> lowpass;
  std::vector<double> highpass;

  static WaveletBasis haar();
  static WaveletBasis db2();
  static WaveletBasis from_name(BasisName name);
};

/// Detail subband orientation. The first letter is the filter applied along
/// rows (vertical direction), the second along columns (horizontal):
/// LH is low vertically / high horizontally.
enum class Subband { LH, HL, HH };

/// Output of a multilevel 2D transform on one plane.
///
/// `values` holds every coefficient in the canonical vector order used
/// throughout the library: the deepest LL band first, then for each level
/// from deepest to finest the LH, HL and HH bands. Each band is row-major.
struct WaveletCoefficients {
  int height = 0;
  int width = 0;
  int levels = 0;
  std::vector<double> values;

  /// Rows and columns of a detail band at `level` (1 = finest).
  int band_height(int level) const { return height >> level; }
  int band_width(int level) const { return width >> level; }
  std::span<const double> approximation() const;
  std::span<const double> detail(int level, Subband band) const;
};

/// Number of levels actually applied to an HxW plane: the requested depth,
/// reduced while both dimensions stay even.
int effective_levels(int height, int width, int requested);

/// Periodized multilevel Mallat decomposition. `plane` is row-major HxW.
/// Throws UsageError if levels < 1 or either dimension is odd.
WaveletCoefficients dwt2(std::span<const double> plane, int height, int width, const WaveletBasis& basis, int levels);

/// Exact inverse of dwt2.
std::vector<double> idwt2(const WaveletCoefficients& coefficients, const WaveletBasis& basis);

/// One row of vectorized coefficients per image.
struct CoefficientMatrix {
  Eigen::MatrixXd values;  // n x d
  std::vector<std::string> image_ids;
  BasisName basis = BasisName::haar;
  int levels = 0;  // effective depth
};

/// Decomposes every channel of every image independently; a row is the
/// concatenation of the per-channel vectors (channel 0 first).
CoefficientMatrix decompose_dataset(const LabeledDataset& dataset, BasisName basis, int levels);

/// Vectorized coefficients of one image, same layout as a CoefficientMatrix row.
std::vector<double> decompose_image(const ImageTensor& image, const WaveletBasis& basis, int levels);

}  // namespace wavesim
