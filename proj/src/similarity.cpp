#include "wavesim/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wavesim/errors.hpp"
#include "wavesim/ingest.hpp"
#include "wavesim/parallel.hpp"

namespace wavesim {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::vector<double> gaussian_taps(const SsimParams& p) {
  std::vector<double> taps(static_cast<std::size_t>(p.window_size));
  const double center = (p.window_size - 1) / 2.0;
  for (int i = 0; i < p.window_size; ++i) {
    const double x = i - center;
    taps[static_cast<std::size_t>(i)] = std::exp(-(x * x) / (2.0 * p.window_sigma * p.window_sigma));
  }
  const double sum = std::accumulate(taps.begin(), taps.end(), 0.0);
  for (double& t : taps) t /= sum;
  return taps;
}

// Separable Gaussian filter over every fully interior window position.
std::vector<double> filter_valid(const std::vector<double>& image, int height, int width, const std::vector<double>& taps) {
  const int win = static_cast<int>(taps.size());
  const int out_h = height - win + 1;
  const int out_w = width - win + 1;
  std::vector<double> horizontal(static_cast<std::size_t>(height) * out_w);
  for (int y = 0; y < height; ++y) {
    const double* row = image.data() + static_cast<std::size_t>(y) * width;
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (int k = 0; k < win; ++k) acc += taps[static_cast<std::size_t>(k)] * row[x + k];
      horizontal[static_cast<std::size_t>(y) * out_w + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(out_h) * out_w);
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (int k = 0; k < win; ++k) acc += taps[static_cast<std::size_t>(k)] * horizontal[static_cast<std::size_t>(y + k) * out_w + x];
      out[static_cast<std::size_t>(y) * out_w + x] = acc;
    }
  }
  return out;
}

// Per-image local statistics reused across every pair an image takes part in.
struct SsimFeatures {
  int height = 0;
  int width = 0;
  std::vector<double> gray;
  std::vector<double> mean;
  std::vector<double> variance;
};

SsimFeatures ssim_features(const ImageTensor& image, const SsimParams& params, const std::vector<double>& taps) {
  if (params.window_size > image.height || params.window_size > image.width) {
    throw UsageError("SSIM window of " + std::to_string(params.window_size) + " pixels exceeds the " +
                     std::to_string(image.height) + "x" + std::to_string(image.width) + " image");
  }
  const ImageTensor luma = to_grayscale(image);
  SsimFeatures f;
  f.height = luma.height;
  f.width = luma.width;
  f.gray.assign(luma.pixels.begin(), luma.pixels.end());
  std::vector<double> squares(f.gray.size());
  for (std::size_t k = 0; k < squares.size(); ++k) squares[k] = f.gray[k] * f.gray[k];
  f.mean = filter_valid(f.gray, f.height, f.width, taps);
  f.variance = filter_valid(squares, f.height, f.width, taps);
  for (std::size_t k = 0; k < f.mean.size(); ++k) f.variance[k] = std::max(0.0, f.variance[k] - f.mean[k] * f.mean[k]);
  return f;
}

double signed_pow(double base, double exponent) {
  if (exponent == 1.0) return base;
  return base < 0.0 ? -std::pow(-base, exponent) : std::pow(base, exponent);
}

double ssim_from_features(const SsimFeatures& a, const SsimFeatures& b, const SsimParams& p, const std::vector<double>& taps) {
  if (a.gray == b.gray) return 1.0;
  std::vector<double> product(a.gray.size());
  for (std::size_t k = 0; k < product.size(); ++k) product[k] = a.gray[k] * b.gray[k];
  const std::vector<double> cross = filter_valid(product, a.height, a.width, taps);

  const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
  const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);
  const double c3 = c2 / 2.0;
  const bool unit_exponents = p.alpha == 1.0 && p.beta == 1.0 && p.gamma == 1.0;
  double total = 0.0;
  for (std::size_t k = 0; k < cross.size(); ++k) {
    const double mx = a.mean[k];
    const double my = b.mean[k];
    const double vx = a.variance[k];
    const double vy = b.variance[k];
    const double sx = std::sqrt(vx);
    const double sy = std::sqrt(vy);
    const double cov = cross[k] - mx * my;
    const double luminance = (2.0 * mx * my + c1) / (mx * mx + my * my + c1);
    const double contrast = (2.0 * sx * sy + c2) / (vx + vy + c2);
    const double structure = (cov + c3) / (sx * sy + c3);
    if (unit_exponents) {
      total += luminance * contrast * structure;
    } else {
      total += signed_pow(luminance, p.alpha) * signed_pow(contrast, p.beta) * signed_pow(structure, p.gamma);
    }
  }
  return std::clamp(total / static_cast<double>(cross.size()), -1.0, 1.0);
}

nlohmann::ordered_json ssim_params_json(const SsimParams& p) {
  return {{"k1", p.k1},
          {"k2", p.k2},
          {"dynamic_range", p.dynamic_range},
          {"window_size", p.window_size},
          {"window_sigma", p.window_sigma},
          {"weights", {p.alpha, p.beta, p.gamma}}};
}

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double resolve_sigma(std::optional<double> sigma, const std::vector<double>& distances) {
  if (sigma) {
    if (!(*sigma > 0.0)) throw UsageError("Gaussian kernel sigma must be positive");
    return *sigma;
  }
  const double median = median_of(distances);
  if (!(median > 0.0)) throw NumericalError("median pairwise distance is zero; set sigma explicitly");
  return median;
}

double gaussian_kernel(double distance, double sigma) {
  return distance == 0.0 ? 1.0 : std::exp(-(distance * distance) / (2.0 * sigma * sigma));
}

double row_distance(const RowMatrix& a, Eigen::Index i, const RowMatrix& b, Eigen::Index j) {
  return std::sqrt((a.row(i) - b.row(j)).squaredNorm());
}

double cosine_rows(const RowMatrix& a, Eigen::Index i, const RowMatrix& b, Eigen::Index j) {
  return cosine_similarity(std::span<const double>(a.row(i).data(), static_cast<std::size_t>(a.cols())),
                           std::span<const double>(b.row(j).data(), static_cast<std::size_t>(b.cols())))
      .value;
}

void require_same_shapes(const LabeledDataset& a, const LabeledDataset& b) {
  if (a.empty() || b.empty()) throw DataError("similarity needs nonempty image sets");
  if (!a.images.front().same_shape(b.images.front())) {
    throw DataError("image shapes differ between the two sets");
  }
}

}  // namespace

void SsimParams::validate() const {
  if (!(k1 > 0.0) || !(k2 > 0.0)) throw UsageError("SSIM constants k1 and k2 must be positive");
  if (!(dynamic_range > 0.0)) throw UsageError("SSIM dynamic range must be positive");
  if (window_size < 1 || window_size % 2 == 0) throw UsageError("SSIM window size must be a positive odd number");
  if (!(window_sigma > 0.0)) throw UsageError("SSIM window sigma must be positive");
}

double ssim(const ImageTensor& a, const ImageTensor& b, const SsimParams& params) {
  params.validate();
  if (!a.same_shape(b)) throw UsageError("SSIM needs images of identical shape");
  const auto taps = gaussian_taps(params);
  return ssim_from_features(ssim_features(a, params, taps), ssim_features(b, params, taps), params, taps);
}

CosineResult cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw UsageError("cosine similarity needs vectors of equal length");
  double dot = 0.0;
  double uu = 0.0;
  double vv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    dot += u[k] * v[k];
    uu += u[k] * u[k];
    vv += v[k] * v[k];
  }
  if (uu == 0.0 || vv == 0.0) return {0.0, true};
  if (std::equal(u.begin(), u.end(), v.begin())) return {1.0, false};
  return {std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0), false};
}

std::string to_string(Measure measure) {
  switch (measure) {
    case Measure::ssim: return "ssim";
    case Measure::cosine: return "cosine";
    case Measure::gaussian: return "gaussian";
  }
  return "ssim";
}

Measure parse_measure(const std::string& text) {
  if (text == "ssim") return Measure::ssim;
  if (text == "cosine") return Measure::cosine;
  if (text == "gaussian") return Measure::gaussian;
  throw UsageError("unknown similarity measure '" + text + "' (expected ssim, cosine or gaussian)");
}

SimilarityMatrix gaussian_similarity_matrix(const CoefficientMatrix& coefficients, std::optional<double> sigma) {
  const Eigen::Index n = coefficients.values.rows();
  if (n < 2) throw UsageError("a similarity matrix needs at least two images");
  const RowMatrix x = coefficients.values;

  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
  parallel_for(0, static_cast<std::size_t>(n), [&](std::size_t ii) {
    const auto i = static_cast<Eigen::Index>(ii);
    for (Eigen::Index j = i + 1; j < n; ++j) dist(i, j) = row_distance(x, i, x, j);
  });
  std::vector<double> upper;
  upper.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) upper.push_back(dist(i, j));
  }
  const double used_sigma = resolve_sigma(sigma, upper);

  SimilarityMatrix out;
  out.measure = Measure::gaussian;
  out.symmetric = true;
  out.row_ids = coefficients.image_ids;
  out.col_ids = coefficients.image_ids;
  out.values = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      out.values(i, j) = gaussian_kernel(dist(i, j), used_sigma);
      out.values(j, i) = out.values(i, j);
    }
  }
  out.params = {{"sigma", used_sigma}, {"sigma_rule", sigma ? "fixed" : "median"},
                {"basis", to_string(coefficients.basis)}, {"levels", coefficients.levels}};
  return out;
}

SimilarityMatrix similarity_matrix(const LabeledDataset& dataset, const SimilarityOptions& options) {
  const auto n = static_cast<Eigen::Index>(dataset.size());
  if (n < 2) throw UsageError("a similarity matrix needs at least two images");

  if (options.measure == Measure::gaussian) {
    return gaussian_similarity_matrix(decompose_dataset(dataset, options.basis, options.levels), options.sigma);
  }

  SimilarityMatrix out;
  out.measure = options.measure;
  out.symmetric = true;
  out.row_ids = dataset.source_ids;
  out.col_ids = dataset.source_ids;
  out.values = Eigen::MatrixXd::Identity(n, n);

  if (options.measure == Measure::ssim) {
    options.ssim.validate();
    const auto taps = gaussian_taps(options.ssim);
    std::vector<SsimFeatures> features(static_cast<std::size_t>(n));
    parallel_for(0, features.size(), [&](std::size_t i) {
      features[i] = ssim_features(dataset.images[i], options.ssim, taps);
    });
    parallel_for(0, static_cast<std::size_t>(n), [&](std::size_t i) {
      for (std::size_t j = i + 1; j < static_cast<std::size_t>(n); ++j) {
        out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            ssim_from_features(features[i], features[j], options.ssim, taps);
      }
    });
    out.params = ssim_params_json(options.ssim);
  } else {
    const CoefficientMatrix coeffs = decompose_dataset(dataset, options.basis, options.levels);
    const RowMatrix x = coeffs.values;
    parallel_for(0, static_cast<std::size_t>(n), [&](std::size_t ii) {
      const auto i = static_cast<Eigen::Index>(ii);
      for (Eigen::Index j = i + 1; j < n; ++j) out.values(i, j) = cosine_rows(x, i, x, j);
    });
    out.params = {{"basis", to_string(coeffs.basis)}, {"levels", coeffs.levels}};
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) out.values(j, i) = out.values(i, j);
  }
  return out;
}

SimilarityMatrix cross_similarity(const LabeledDataset& train, const LabeledDataset& test,
                                  const SimilarityOptions& options) {
  require_same_shapes(train, test);
  const auto rows = static_cast<Eigen::Index>(test.size());
  const auto cols = static_cast<Eigen::Index>(train.size());

  SimilarityMatrix out;
  out.measure = options.measure;
  out.symmetric = false;
  out.row_ids = test.source_ids;
  out.col_ids = train.source_ids;
  out.values = Eigen::MatrixXd::Zero(rows, cols);

  if (options.measure == Measure::ssim) {
    options.ssim.validate();
    const auto taps = gaussian_taps(options.ssim);
    std::vector<SsimFeatures> train_features(train.size());
    std::vector<SsimFeatures> test_features(test.size());
    parallel_for(0, train.size(), [&](std::size_t i) { train_features[i] = ssim_features(train.images[i], options.ssim, taps); });
    parallel_for(0, test.size(), [&](std::size_t i) { test_features[i] = ssim_features(test.images[i], options.ssim, taps); });
    parallel_for(0, test.size(), [&](std::size_t t) {
      for (std::size_t r = 0; r < train.size(); ++r) {
        out.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(r)) =
            ssim_from_features(test_features[t], train_features[r], options.ssim, taps);
      }
    });
    out.params = ssim_params_json(options.ssim);
    return out;
  }

  const CoefficientMatrix train_coeffs = decompose_dataset(train, options.basis, options.levels);
  const CoefficientMatrix test_coeffs = decompose_dataset(test, options.basis, options.levels);
  const RowMatrix a = test_coeffs.values;
  const RowMatrix b = train_coeffs.values;
  if (options.measure == Measure::cosine) {
    parallel_for(0, static_cast<std::size_t>(rows), [&](std::size_t t) {
      for (Eigen::Index r = 0; r < cols; ++r) out.values(static_cast<Eigen::Index>(t), r) = cosine_rows(a, static_cast<Eigen::Index>(t), b, r);
    });
    out.params = {{"basis", to_string(train_coeffs.basis)}, {"levels", train_coeffs.levels}};
    return out;
  }

  Eigen::MatrixXd dist(rows, cols);
  parallel_for(0, static_cast<std::size_t>(rows), [&](std::size_t t) {
    for (Eigen::Index r = 0; r < cols; ++r) dist(static_cast<Eigen::Index>(t), r) = row_distance(a, static_cast<Eigen::Index>(t), b, r);
  });
  const double used_sigma = resolve_sigma(options.sigma, std::vector<double>(dist.data(), dist.data() + dist.size()));
  for (Eigen::Index t = 0; t < rows; ++t) {
    for (Eigen::Index r = 0; r < cols; ++r) out.values(t, r) = gaussian_kernel(dist(t, r), used_sigma);
  }
  out.params = {{"sigma", used_sigma}, {"sigma_rule", options.sigma ? "fixed" : "median"},
                {"basis", to_string(train_coeffs.basis)}, {"levels", train_coeffs.levels}};
  return out;
}

MatrixSummary summarize(const SimilarityMatrix& matrix) {
  MatrixSummary s;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < matrix.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.values.cols(); ++j) {
      if (matrix.symmetric && i == j) continue;
      const double v = matrix.values(i, j);
      sum += v;
      s.min = std::min(s.min, v);
      s.max = std::max(s.max, v);
      ++s.count;
    }
  }
  if (s.count == 0) return MatrixSummary{};
  s.mean = sum / static_cast<double>(s.count);
  double ss = 0.0;
  for (Eigen::Index i = 0; i < matrix.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.values.cols(); ++j) {
      if (matrix.symmetric && i == j) continue;
      const double dv = matrix.values(i, j) - s.mean;
      ss += dv * dv;
    }
  }
  s.stddev = std::sqrt(ss / static_cast<double>(s.count));
  return s;
}

}  // namespace wavesim
