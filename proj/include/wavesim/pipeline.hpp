#pragma once

#include <Eigen/Dense>

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wavesim/graph.hpp"
#include "wavesim/image.hpp"
#include "wavesim/numerics.hpp"
#include "wavesim/similarity.hpp"
#include "wavesim/wavelet.hpp"

namespace wavesim {

struct RedundantGroup {
  std::vector<std::string> members;
  int label = 0;
  std::string representative;
};

struct InfluentialGroup {
  std::vector<std::string> members;
  std::vector<int> labels;  // parallel to members
};

/// Outcome of one analysis. Every image lands in exactly one redundant group,
/// one influential group, or stays a singleton; kept_ids is the reduced set.
struct AnalysisReport {
  std::string procedure;
  std::vector<RedundantGroup> redundant_groups;
  std::vector<InfluentialGroup> influential_groups;
  std::vector<std::string> kept_ids;  // dataset order
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  nlohmann::ordered_json details = nlohmann::ordered_json::object();
  std::vector<std::pair<std::string, double>> timings;  // seconds per stage
  std::vector<std::string> warnings;
};

/// Throws NumericalError naming the first violated partition invariant.
void validate_report(const AnalysisReport& report, const LabeledDataset& dataset);

nlohmann::ordered_json to_json(const AnalysisReport& report, bool include_timings = true);

/// FNV-1a 64 over the report JSON without timings, as 16 hex digits.
std::string report_digest(const AnalysisReport& report);
std::string fnv1a_hex(const std::string& bytes);

/// group_id,member_id,label,role,representative_flag
std::string groups_csv(const AnalysisReport& report);
std::string kept_ids_csv(const AnalysisReport& report);

/// Member closest to the members' mean row; ties go to the lowest index.
std::size_t representative(const std::vector<std::size_t>& members, const Eigen::MatrixXd& features);

/// Turns a clustering into the redundant / influential / kept partition.
/// `features` decides representatives.
AnalysisReport partition_clusters(const LabeledDataset& dataset, const std::vector<int>& cluster_of,
                                  const Eigen::MatrixXd& features);

enum class ClusteringMethod { kmeans, agglomerative, spectral };

std::string to_string(ClusteringMethod method);
ClusteringMethod parse_clustering_method(const std::string& text);

struct Algorithm1Options {
  BasisName basis = BasisName::db2;
  int levels = 1;
  double tau = 1e5;          // condition ceiling when n > d
  double stop_ratio = 0.0;   // rank tolerance applied when n <= d (0 = keep all columns)
  ClusteringMethod method = ClusteringMethod::kmeans;
  std::optional<int> n_c;    // unset: eigen-gap rule on a Gaussian kernel over the selected coefficients
  double gamma = 0.4;
  LaplacianKind laplacian = LaplacianKind::unnormalized;
  double distance_cutoff = 0.0;
  std::uint64_t seed = 0;
  int restarts = 10;
};

AnalysisReport algorithm1(const LabeledDataset& dataset, const Algorithm1Options& options);

struct Algorithm2Options {
  SimilarityOptions similarity;
  double gamma = 0.4;
  std::optional<int> n_c;
  LaplacianKind laplacian = LaplacianKind::unnormalized;
  std::uint64_t seed = 0;
  int restarts = 10;
};

struct Algorithm2Result {
  AnalysisReport report;
  SimilarityMatrix similarity;
  LaplacianSpectrum spectrum;
  int n_c = 1;
};

Algorithm2Result algorithm2(const LabeledDataset& dataset, const Algorithm2Options& options);
/// Same, reusing an already computed symmetric matrix over `dataset`.
Algorithm2Result algorithm2(const LabeledDataset& dataset, SimilarityMatrix similarity, const Algorithm2Options& options);

/// Connected components of S_ij >= threshold; representative maximizes total
/// within-group similarity (ties: lowest index).
AnalysisReport dedupe_by_threshold(const SimilarityMatrix& similarity, const std::vector<int>& labels,
                                   double similarity_threshold);

struct CrossMatch {
  std::string test_id;
  int test_label = 0;
  std::string best_train_id;
  int best_train_label = 0;
  double max_similarity = 0.0;
  std::optional<double> best_same_label;
  std::optional<double> best_other_label;
};

struct CrossSetReport {
  std::vector<CrossMatch> matches;                // test order
  double near_identical_threshold = 0.9;
  double near_identical_fraction = 0.0;
  std::vector<std::size_t> dissimilarity_ranking;  // ascending max similarity
  std::vector<std::size_t> cross_label;           // best other-label match beats best same-label match
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
};

/// Fraction of rows of a test x train matrix whose maximum reaches threshold.
double near_identical_fraction(const Eigen::MatrixXd& cross, double threshold);

CrossSetReport cross_set_report(const SimilarityMatrix& cross, const std::vector<int>& train_labels,
                                const std::vector<int>& test_labels, double near_identical_threshold);

nlohmann::ordered_json to_json(const CrossSetReport& report);

/// Runs `analyze` once per class and merges the partitions in dataset order.
AnalysisReport per_class(const LabeledDataset& dataset,
                         const std::function<AnalysisReport(const LabeledDataset&)>& analyze);

struct CoefficientStats {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<Eigen::Index> zero_columns;
  ConditionNumber condition;  // of the matrix without zero columns
  std::optional<ColumnSelection> selection;
};

CoefficientStats coefficient_stats(const CoefficientMatrix& coefficients, double tau, ConditionMode mode);
nlohmann::ordered_json to_json(const CoefficientStats& stats);

}  // namespace wavesim
