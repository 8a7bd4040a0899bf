#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace wavesim {

/// Column-pivoted Householder QR: A P = Q R.
struct PivotedQRResult {
  std::vector<double> r_diagonal;         // |R_kk| in pivot order, non-increasing
  std::vector<Eigen::Index> permutation;  // all column indices, most independent first
  Eigen::Index columns_processed = 0;
  Eigen::MatrixXd r;                      // columns_processed x d, columns in pivot order
  std::optional<Eigen::MatrixXd> q;       // n x columns_processed when requested

  /// Number of pivots whose ratio |R_kk| / |R_11| is at least `tolerance`.
  Eigen::Index numerical_rank(double tolerance) const;
  /// |R_11| / |R_mm| for the first m pivots (m >= 1).
  double condition_estimate(Eigen::Index m) const;
};

/// Businger-Golub pivoting on exact remaining-column norms. With
/// stop_ratio > 0 the factorization stops after the first pivot k with
/// |R_kk| / |R_11| < stop_ratio; columns not processed are appended to the
/// permutation by descending residual norm (ties: lower index first).
PivotedQRResult pivoted_qr(const Eigen::MatrixXd& matrix, double stop_ratio = 0.0, bool keep_q = false);

struct ColumnSelection {
  Eigen::Index m = 0;
  std::vector<Eigen::Index> column_indices;    // original indices, pivot order, size m
  std::vector<Eigen::Index> constant_columns;  // excluded before the QR
  double condition_estimate = 1.0;             // |R_11| / |R_mm|
  std::vector<double> r_diagonal;              // of the factorization that was run
};

/// Largest m with |R_11| / |R_mm| < tau after dropping columns that are
/// constant across all rows. Requires tau > 1.
ColumnSelection select_columns(const Eigen::MatrixXd& matrix, double tau);

/// Keeps every pivot with |R_kk| / |R_11| >= rank_tolerance; the same rule
/// expressed as a relative rank tolerance (rank_tolerance = 1 / tau).
ColumnSelection select_columns_by_rank(const Eigen::MatrixXd& matrix, double rank_tolerance);

/// Copies the listed columns in order.
Eigen::MatrixXd take_columns(const Eigen::MatrixXd& matrix, const std::vector<Eigen::Index>& columns);

enum class ConditionMode { automatic, exact, fast };

struct ConditionNumber {
  double value = 1.0;       // +infinity when rank deficient
  double raw_ratio = 1.0;   // sigma_max / sigma_min (or R proxy) before the infinity rule
  ConditionMode mode = ConditionMode::exact;
  bool rank_deficient = false;
};

/// Exact mode uses singular values (n >= d, reduced through a QR first when
/// n > d); fast mode uses the pivoted R-diagonal ratio. Automatic picks exact
/// when n >= d. A ratio beyond 1/epsilon reports rank deficiency.
ConditionNumber condition_number(const Eigen::MatrixXd& matrix, ConditionMode mode = ConditionMode::automatic);

/// Ascending eigenvalues of a symmetric matrix (asymmetry tolerance 1e-10).
Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& matrix);

struct EigenPairs {
  Eigen::VectorXd values;   // k ascending
  Eigen::MatrixXd vectors;  // n x k, orthonormal columns
};

EigenPairs symmetric_eigenpairs(const Eigen::MatrixXd& matrix, Eigen::Index k_smallest);

struct ClusterAssignment {
  std::vector<int> cluster_of;
  int k = 0;
  std::optional<Eigen::MatrixXd> centroids;  // k x d
  std::optional<double> inertia;
  std::vector<double> inertia_history;       // one entry per Lloyd iteration of the winning run
  int iterations = 0;
};

struct KMeansOptions {
  int k = 2;
  std::uint64_t seed = 0;
  int max_iters = 300;
  int restarts = 10;
};

/// k-means++ seeding, Lloyd iterations, then single-point moves that lower the
/// inertia; best of `restarts` runs.
/// Ties in assignment go to the lowest centroid index. An empty cluster is
/// repaired by moving into it the point farthest from its centroid together
/// with its exact duplicates in the same cluster.
ClusterAssignment kmeans(const Eigen::MatrixXd& points, const KMeansOptions& options);

/// Single-linkage components of the graph joining points at Euclidean
/// distance <= cutoff. Clusters are numbered by their lowest member.
ClusterAssignment agglomerative_threshold(const Eigen::MatrixXd& points, double distance_cutoff);

/// Cluster index per node for the connected components of an undirected edge
/// list, numbered by lowest member.
std::vector<int> connected_components(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

}  // namespace wavesim
