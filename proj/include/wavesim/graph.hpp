#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "wavesim/numerics.hpp"
#include "wavesim/similarity.hpp"

namespace wavesim {

enum class LaplacianKind { unnormalized, normalized };

std::string to_string(LaplacianKind kind);
LaplacianKind parse_laplacian_kind(const std::string& text);

struct Laplacian {
  Eigen::MatrixXd matrix;
  LaplacianKind kind = LaplacianKind::unnormalized;
  std::size_t clamped_count = 0;  // off-diagonal pairs (i < j) whose similarity was negative
};

/// L = D - W with W = max(S, 0) off the diagonal. The normalized variant is
/// D^-1/2 L D^-1/2; isolated nodes get a zero row and column.
Laplacian laplacian(const Eigen::MatrixXd& similarity, LaplacianKind kind = LaplacianKind::unnormalized);
Laplacian laplacian(const SimilarityMatrix& similarity, LaplacianKind kind = LaplacianKind::unnormalized);

struct LaplacianSpectrum {
  Eigen::VectorXd eigenvalues;  // ascending
  Eigen::Index n = 0;
  LaplacianKind construction = LaplacianKind::unnormalized;
  std::size_t clamped_count = 0;
};

LaplacianSpectrum laplacian_spectrum(const Laplacian& l);

/// Number of consecutive eigenvalue gaps strictly above gamma, at least 1.
int eigen_gap_count(const Eigen::VectorXd& ascending, double gamma);

struct SpectralClustering {
  ClusterAssignment assignment;
  Eigen::MatrixXd embedding;  // n x n_c, rows normalized for the normalized Laplacian
};

/// k-means on the eigenvectors of the n_c smallest eigenvalues.
SpectralClustering spectral_clustering(const Laplacian& l, int n_c, std::uint64_t seed, int restarts = 10);
SpectralClustering spectral_clustering(const SimilarityMatrix& similarity, int n_c, std::uint64_t seed,
                                       LaplacianKind kind = LaplacianKind::unnormalized);

struct IsolationScores {
  std::vector<double> score;         // max similarity to any other image
  std::vector<std::size_t> ranking;  // most isolated first; ties by index
};

IsolationScores isolation_scores(const SimilarityMatrix& similarity);

/// Undirected DOT graph with an edge wherever S_ij >= edge_threshold.
/// Node labels default to the matrix row ids.
std::string export_dot(const SimilarityMatrix& similarity, double edge_threshold,
                       const std::vector<std::string>& labels = {});

}  // namespace wavesim
