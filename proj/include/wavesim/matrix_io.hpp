#pragma once

#include <Eigen/Dense>

#include "json.hpp"

#include <filesystem>
#include <string>

#include "wavesim/similarity.hpp"
#include "wavesim/wavelet.hpp"

namespace wavesim {

/// Row-major little-endian float64 payload at `path` plus `path` + ".json"
/// holding {"rows", "cols", ...metadata}.
void write_matrix_binary(const std::filesystem::path& path, const Eigen::MatrixXd& matrix,
                         nlohmann::ordered_json metadata = nlohmann::ordered_json::object());

struct StoredMatrix {
  Eigen::MatrixXd values;
  nlohmann::ordered_json metadata;
};

StoredMatrix read_matrix_binary(const std::filesystem::path& path);

/// Row-major CSV with six significant digits.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& matrix);

void save(const std::filesystem::path& path, const CoefficientMatrix& coefficients);
void save(const std::filesystem::path& path, const SimilarityMatrix& similarity);

CoefficientMatrix load_coefficients(const std::filesystem::path& path);
SimilarityMatrix load_similarity(const std::filesystem::path& path);

/// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace wavesim
