#include "wavesim/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "wavesim/errors.hpp"

namespace wavesim {

namespace {

void require_symmetric(const Eigen::MatrixXd& s) {
  if (s.rows() != s.cols() || s.rows() < 1) throw UsageError("similarity matrix must be square and nonempty");
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < s.cols(); ++j) {
      if (s(i, j) != s(j, i)) {
        throw UsageError("similarity matrix is not symmetric at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
      }
    }
  }
}

std::string escape_dot(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string to_string(LaplacianKind kind) { return kind == LaplacianKind::normalized ? "normalized" : "unnormalized"; }

LaplacianKind parse_laplacian_kind(const std::string& text) {
  if (text == "unnormalized") return LaplacianKind::unnormalized;
  if (text == "normalized") return LaplacianKind::normalized;
  throw UsageError("unknown Laplacian '" + text + "' (expected unnormalized or normalized)");
}

Laplacian laplacian(const Eigen::MatrixXd& s, LaplacianKind kind) {
  require_symmetric(s);
  const Eigen::Index n = s.rows();
  Laplacian out;
  out.kind = kind;
  out.matrix = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double w = s(i, j);
      if (w < 0.0) {
        w = 0.0;
        ++out.clamped_count;
      }
      out.matrix(i, j) = -w;
      out.matrix(j, i) = -w;
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) out.matrix(i, i) = -out.matrix.row(i).sum();

  if (kind == LaplacianKind::normalized) {
    Eigen::VectorXd inv_sqrt(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double degree = out.matrix(i, i);
      inv_sqrt(i) = degree > 0.0 ? 1.0 / std::sqrt(degree) : 0.0;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) out.matrix(i, j) *= inv_sqrt(i) * inv_sqrt(j);
    }
  }
  return out;
}

Laplacian laplacian(const SimilarityMatrix& similarity, LaplacianKind kind) {
  if (!similarity.symmetric) throw UsageError("a Laplacian needs a symmetric similarity matrix");
  return laplacian(similarity.values, kind);
}

LaplacianSpectrum laplacian_spectrum(const Laplacian& l) {
  LaplacianSpectrum out;
  out.eigenvalues = symmetric_eigenvalues(l.matrix);
  out.n = l.matrix.rows();
  out.construction = l.kind;
  out.clamped_count = l.clamped_count;
  return out;
}

int eigen_gap_count(const Eigen::VectorXd& ascending, double gamma) {
  if (!(gamma > 0.0)) throw UsageError("eigen-gap threshold gamma must be positive");
  int count = 0;
  for (Eigen::Index i = 0; i + 1 < ascending.size(); ++i) {
    const double gap = ascending(i + 1) - ascending(i);
    if (gap < 0.0) throw UsageError("eigenvalues must be sorted ascending");
    if (gap > gamma) ++count;
  }
  return std::max(count, 1);
}

SpectralClustering spectral_clustering(const Laplacian& l, int n_c, std::uint64_t seed, int restarts) {
  const Eigen::Index n = l.matrix.rows();
  if (n_c < 1 || n_c > n) {
    throw UsageError("spectral clustering needs 1 <= n_c <= n, got n_c=" + std::to_string(n_c) + " n=" + std::to_string(n));
  }
  SpectralClustering out;
  out.embedding = symmetric_eigenpairs(l.matrix, n_c).vectors;
  if (l.kind == LaplacianKind::normalized) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double norm = out.embedding.row(i).norm();
      if (norm > 0.0) out.embedding.row(i) /= norm;
    }
  }
  KMeansOptions options;
  options.k = n_c;
  options.seed = seed;
  options.restarts = restarts;
  out.assignment = kmeans(out.embedding, options);
  return out;
}

SpectralClustering spectral_clustering(const SimilarityMatrix& similarity, int n_c, std::uint64_t seed, LaplacianKind kind) {
  return spectral_clustering(laplacian(similarity, kind), n_c, seed);
}

IsolationScores isolation_scores(const SimilarityMatrix& similarity) {
  if (!similarity.symmetric) throw UsageError("isolation scores need a symmetric similarity matrix");
  const Eigen::MatrixXd& s = similarity.values;
  require_symmetric(s);
  const Eigen::Index n = s.rows();
  if (n < 2) throw UsageError("isolation scores need at least two images");
  IsolationScores out;
  out.score.assign(static_cast<std::size_t>(n), -std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) out.score[static_cast<std::size_t>(i)] = std::max(out.score[static_cast<std::size_t>(i)], s(i, j));
    }
  }
  out.ranking.resize(static_cast<std::size_t>(n));
  std::iota(out.ranking.begin(), out.ranking.end(), std::size_t{0});
  std::stable_sort(out.ranking.begin(), out.ranking.end(),
                   [&](std::size_t a, std::size_t b) { return out.score[a] < out.score[b]; });
  return out;
}

std::string export_dot(const SimilarityMatrix& similarity, double edge_threshold, const std::vector<std::string>& labels) {
  if (!(edge_threshold >= -1.0 && edge_threshold <= 1.0)) {
    throw UsageError("edge threshold must lie in [-1, 1]");
  }
  if (!similarity.symmetric) throw UsageError("DOT export needs a symmetric similarity matrix");
  const Eigen::MatrixXd& s = similarity.values;
  require_symmetric(s);
  const auto n = static_cast<std::size_t>(s.rows());
  const std::vector<std::string>& names = labels.empty() ? similarity.row_ids : labels;
  if (names.size() != n) throw UsageError("DOT export needs one label per node");

  std::string out = "graph G {\n";
  for (std::size_t i = 0; i < n; ++i) {
    out += "  " + std::to_string(i) + " [label=\"" + escape_dot(names[i]) + "\"];\n";
  }
  char weight[32];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (w < edge_threshold) continue;
      std::snprintf(weight, sizeof(weight), "%.3f", w);
      out += "  " + std::to_string(i) + " -- " + std::to_string(j) + " [label=\"" + weight + "\"];\n";
    }
  }
  out += "}\n";
  return out;
}

}  // namespace wavesim
