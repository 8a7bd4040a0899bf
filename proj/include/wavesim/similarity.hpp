#pragma once

#include <Eigen/Dense>

#include "json.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wavesim/image.hpp"
#include "wavesim/wavelet.hpp"

namespace wavesim {

/// Structural similarity parameters. Defaults are the usual
/// (K1, K2, L, window, sigma) = (0.01, 0.03, 1, 11, 1.5) with unit exponents.
struct SsimParams {
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
  int window_size = 11;
  double window_sigma = 1.5;
  double alpha = 1.0;  // luminance exponent
  double beta = 1.0;   // contrast exponent
  double gamma = 1.0;  // structure exponent

  void validate() const;
};

/// Mean local SSIM over every Gaussian window lying fully inside the image.
/// Colour input is converted to luma first. Bitwise-identical images score 1.
double ssim(const ImageTensor& a, const ImageTensor& b, const SsimParams& params = {});

struct CosineResult {
  double value = 0.0;
  bool zero_norm = false;  // set when either vector is zero; value is then 0
};

CosineResult cosine_similarity(std::span<const double> u, std::span<const double> v);

enum class Measure { ssim, cosine, gaussian };

std::string to_string(Measure measure);
Measure parse_measure(const std::string& text);

struct SimilarityMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
  Measure measure = Measure::ssim;
  bool symmetric = false;
  nlohmann::ordered_json params;  // echo of the measure parameters actually used
};

/// Everything a measure may need. Cosine and Gaussian work on wavelet
/// coefficients of the images; `sigma` unset means the median heuristic.
struct SimilarityOptions {
  Measure measure = Measure::ssim;
  SsimParams ssim;
  BasisName basis = BasisName::db2;
  int levels = 1;
  std::optional<double> sigma;
};

/// exp(-d^2 / (2 sigma^2)) over Euclidean row distances. Without sigma the
/// median off-diagonal distance is used.
SimilarityMatrix gaussian_similarity_matrix(const CoefficientMatrix& coefficients, std::optional<double> sigma = {});

/// Symmetric n x n matrix: upper triangle computed, mirrored, unit diagonal.
SimilarityMatrix similarity_matrix(const LabeledDataset& dataset, const SimilarityOptions& options);

/// Rows are test images, columns are train images.
SimilarityMatrix cross_similarity(const LabeledDataset& train, const LabeledDataset& test,
                                  const SimilarityOptions& options);

/// Mean, standard deviation, minimum and maximum of the off-diagonal entries
/// (all entries for a rectangular matrix).
struct MatrixSummary {
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

MatrixSummary summarize(const SimilarityMatrix& matrix);

}  // namespace wavesim
