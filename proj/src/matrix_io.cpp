#include "wavesim/matrix_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

#include "wavesim/errors.hpp"

namespace wavesim {

namespace {

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t out = 0;
    for (int b = 0; b < 8; ++b) out |= ((v >> (8 * b)) & 0xffu) << (8 * (7 - b));
    return out;
  }
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".json");
}

std::ofstream open_for_write(const std::filesystem::path& path, std::ios::openmode mode) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw UsageError("cannot write " + path.string());
  return out;
}

std::vector<std::string> string_list(const nlohmann::ordered_json& j, const char* key) {
  if (!j.contains(key)) return {};
  return j.at(key).get<std::vector<std::string>>();
}

}  // namespace

void write_matrix_binary(const std::filesystem::path& path, const Eigen::MatrixXd& matrix, nlohmann::ordered_json metadata) {
  std::vector<std::uint64_t> words;
  words.reserve(static_cast<std::size_t>(matrix.size()));
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) words.push_back(to_little_endian(std::bit_cast<std::uint64_t>(matrix(i, j))));
  }
  {
    auto out = open_for_write(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(words.data()), static_cast<std::streamsize>(words.size() * sizeof(std::uint64_t)));
    if (!out) throw UsageError("failed writing " + path.string());
  }
  nlohmann::ordered_json sidecar;
  sidecar["rows"] = matrix.rows();
  sidecar["cols"] = matrix.cols();
  sidecar["dtype"] = "float64le";
  sidecar["layout"] = "row-major";
  for (auto& [key, value] : metadata.items()) sidecar[key] = value;
  write_text(sidecar_path(path), sidecar.dump(2) + "\n");
}

StoredMatrix read_matrix_binary(const std::filesystem::path& path) {
  std::ifstream meta_in(sidecar_path(path));
  if (!meta_in) throw UsageError("matrix sidecar not found: " + sidecar_path(path).string());
  StoredMatrix out;
  try {
    out.metadata = nlohmann::ordered_json::parse(meta_in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed matrix sidecar " + sidecar_path(path).string() + ": " + e.what());
  }
  const auto rows = out.metadata.at("rows").get<Eigen::Index>();
  const auto cols = out.metadata.at("cols").get<Eigen::Index>();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("matrix file not found: " + path.string());
  std::vector<std::uint64_t> words(static_cast<std::size_t>(rows * cols));
  in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(words.size() * sizeof(std::uint64_t)));
  if (in.gcount() != static_cast<std::streamsize>(words.size() * sizeof(std::uint64_t)) || in.peek() != EOF) {
    throw DataError("matrix file " + path.string() + " does not hold " + std::to_string(rows) + "x" + std::to_string(cols) + " values");
  }
  out.values.resize(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) out.values(i, j) = std::bit_cast<double>(to_little_endian(words[k++]));
  }
  return out;
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& matrix) {
  std::string text;
  char cell[32];
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      std::snprintf(cell, sizeof(cell), "%.6g", matrix(i, j));
      if (j > 0) text.push_back(',');
      text += cell;
    }
    text.push_back('\n');
  }
  write_text(path, text);
}

void save(const std::filesystem::path& path, const CoefficientMatrix& coefficients) {
  write_matrix_binary(path, coefficients.values,
                      {{"kind", "coefficients"},
                       {"basis", to_string(coefficients.basis)},
                       {"levels", coefficients.levels},
                       {"image_ids", coefficients.image_ids}});
}

void save(const std::filesystem::path& path, const SimilarityMatrix& similarity) {
  write_matrix_binary(path, similarity.values,
                      {{"kind", "similarity"},
                       {"measure", to_string(similarity.measure)},
                       {"symmetric", similarity.symmetric},
                       {"params", similarity.params},
                       {"row_ids", similarity.row_ids},
                       {"col_ids", similarity.col_ids}});
}

CoefficientMatrix load_coefficients(const std::filesystem::path& path) {
  StoredMatrix stored = read_matrix_binary(path);
  CoefficientMatrix out;
  out.values = std::move(stored.values);
  out.basis = parse_basis(stored.metadata.value("basis", std::string("db2")));
  out.levels = stored.metadata.value("levels", 1);
  out.image_ids = string_list(stored.metadata, "image_ids");
  return out;
}

SimilarityMatrix load_similarity(const std::filesystem::path& path) {
  StoredMatrix stored = read_matrix_binary(path);
  SimilarityMatrix out;
  out.values = std::move(stored.values);
  out.measure = parse_measure(stored.metadata.value("measure", std::string("ssim")));
  out.symmetric = stored.metadata.value("symmetric", false);
  if (stored.metadata.contains("params")) out.params = stored.metadata.at("params");
  out.row_ids = string_list(stored.metadata, "row_ids");
  out.col_ids = string_list(stored.metadata, "col_ids");
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_for_write(path, std::ios::binary);
  out << text;
  if (!out) throw UsageError("failed writing " + path.string());
}

}  // namespace wavesim
