#include "wavesim/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

#include "wavesim/errors.hpp"

namespace wavesim {

namespace {

using Clock = std::chrono::steady_clock;

// Largest n for which the default n_c rule builds a dense kernel matrix.
constexpr Eigen::Index kMaxKernelImages = 5000;

// Runs one named stage, recording its wall time and prefixing failures with
// the stage name.
template <typename F>
auto run_stage(AnalysisReport& report, const std::string& name, F&& body) {
  const auto start = Clock::now();
  const auto record = [&] {
    report.timings.emplace_back(name, std::chrono::duration<double>(Clock::now() - start).count());
  };
  try {
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      record();
    } else {
      auto result = body();
      record();
      return result;
    }
  } catch (const Error& e) {
    rethrow_prefixed(e, name + ": ");
  }
}

int cluster_count(const std::vector<int>& cluster_of) {
  return cluster_of.empty() ? 0 : *std::max_element(cluster_of.begin(), cluster_of.end()) + 1;
}

std::vector<std::vector<std::size_t>> members_by_cluster(const std::vector<int>& cluster_of) {
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(cluster_count(cluster_of)));
  for (std::size_t i = 0; i < cluster_of.size(); ++i) members[static_cast<std::size_t>(cluster_of[i])].push_back(i);
  // Order groups by their lowest member so reports do not depend on cluster numbering.
  std::erase_if(members, [](const auto& m) { return m.empty(); });
  std::sort(members.begin(), members.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return members;
}

// Builds the partition given the groups and a representative picker.
AnalysisReport partition_groups(const LabeledDataset& dataset, const std::vector<std::vector<std::size_t>>& groups,
                                const std::function<std::size_t(const std::vector<std::size_t>&)>& pick) {
  AnalysisReport report;
  std::vector<bool> dropped(dataset.size(), false);
  for (const auto& members : groups) {
    if (members.size() < 2) continue;
    const int first_label = dataset.labels[members.front()];
    const bool uniform = std::all_of(members.begin(), members.end(),
                                     [&](std::size_t i) { return dataset.labels[i] == first_label; });
    if (uniform) {
      RedundantGroup g;
      g.label = first_label;
      const std::size_t rep = pick(members);
      g.representative = dataset.source_ids[rep];
      for (std::size_t i : members) {
        g.members.push_back(dataset.source_ids[i]);
        if (i != rep) dropped[i] = true;
      }
      report.redundant_groups.push_back(std::move(g));
    } else {
      InfluentialGroup g;
      for (std::size_t i : members) {
        g.members.push_back(dataset.source_ids[i]);
        g.labels.push_back(dataset.labels[i]);
      }
      report.influential_groups.push_back(std::move(g));
    }
  }
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (!dropped[i]) report.kept_ids.push_back(dataset.source_ids[i]);
  }
  return report;
}

int eigen_gap_choice(const Eigen::MatrixXd& features, const std::vector<std::string>& ids, BasisName basis, int levels,
                     double gamma, LaplacianKind kind, nlohmann::ordered_json& details) {
  CoefficientMatrix rows;
  rows.values = features;
  rows.image_ids = ids;
  rows.basis = basis;
  rows.levels = levels;
  const SimilarityMatrix kernel = gaussian_similarity_matrix(rows);
  const LaplacianSpectrum spectrum = laplacian_spectrum(laplacian(kernel, kind));
  const int n_c = eigen_gap_count(spectrum.eigenvalues, gamma);
  details["n_c_source"] = "eigen_gap";
  details["kernel_sigma"] = kernel.params["sigma"];
  return n_c;
}

std::string json_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

}  // namespace

void validate_report(const AnalysisReport& report, const LabeledDataset& dataset) {
  const auto fail = [](const std::string& why) { throw NumericalError("report invariant violated: " + why); };
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < dataset.size(); ++i) index.emplace(dataset.source_ids[i], i);
  const std::set<std::string> kept(report.kept_ids.begin(), report.kept_ids.end());
  if (kept.size() != report.kept_ids.size()) fail("kept_ids has duplicates");

  std::vector<int> seen(dataset.size(), 0);
  const auto lookup = [&](const std::string& id) {
    const auto it = index.find(id);
    if (it == index.end()) fail("unknown id " + id);
    return it->second;
  };
  std::size_t dropped = 0;
  for (const auto& g : report.redundant_groups) {
    if (g.members.size() < 2) fail("redundant group smaller than 2");
    bool has_rep = false;
    for (const auto& id : g.members) {
      const std::size_t i = lookup(id);
      ++seen[i];
      if (dataset.labels[i] != g.label) fail("redundant group with mixed labels");
      if (id == g.representative) {
        has_rep = true;
        if (!kept.count(id)) fail("representative " + id + " missing from kept_ids");
      } else if (kept.count(id)) {
        fail("non-representative " + id + " still kept");
      }
    }
    if (!has_rep) fail("representative outside its group");
    dropped += g.members.size() - 1;
  }
  for (const auto& g : report.influential_groups) {
    if (g.members.size() < 2) fail("influential group smaller than 2");
    std::set<int> labels;
    for (const auto& id : g.members) {
      const std::size_t i = lookup(id);
      ++seen[i];
      labels.insert(dataset.labels[i]);
      if (!kept.count(id)) fail("influential member " + id + " missing from kept_ids");
    }
    if (labels.size() < 2) fail("influential group with a single label");
  }
  for (const auto& id : report.kept_ids) {
    const std::size_t i = lookup(id);
    if (seen[i] == 0) seen[i] = 1;
  }
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (seen[i] != 1) fail("image " + dataset.source_ids[i] + " appears " + std::to_string(seen[i]) + " times");
  }
  if (report.kept_ids.size() != dataset.size() - dropped) fail("kept count does not match group sizes");
}

nlohmann::ordered_json to_json(const AnalysisReport& report, bool include_timings) {
  nlohmann::ordered_json j;
  j["procedure"] = report.procedure;
  j["parameters"] = report.parameters;
  j["summary"] = {{"kept", report.kept_ids.size()},
                  {"redundant_groups", report.redundant_groups.size()},
                  {"influential_groups", report.influential_groups.size()}};
  j["details"] = report.details;
  auto& redundant = j["redundant_groups"] = nlohmann::ordered_json::array();
  for (const auto& g : report.redundant_groups) {
    redundant.push_back({{"label", g.label}, {"representative", g.representative}, {"members", g.members}});
  }
  auto& influential = j["influential_groups"] = nlohmann::ordered_json::array();
  for (const auto& g : report.influential_groups) {
    influential.push_back({{"members", g.members}, {"labels", g.labels}});
  }
  j["kept_ids"] = report.kept_ids;
  j["warnings"] = report.warnings;
  if (include_timings) {
    nlohmann::ordered_json t = nlohmann::ordered_json::object();
    for (const auto& [stage, seconds] : report.timings) t[stage] = seconds;
    j["timings"] = t;
  }
  return j;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string report_digest(const AnalysisReport& report) { return fnv1a_hex(to_json(report, false).dump()); }

std::string groups_csv(const AnalysisReport& report) {
  std::string out = "group_id,member_id,label,role,representative_flag\n";
  int group = 0;
  for (const auto& g : report.redundant_groups) {
    for (const auto& id : g.members) {
      out += std::to_string(group) + "," + csv_field(id) + "," + std::to_string(g.label) + ",redundant," +
             (id == g.representative ? "1" : "0") + "\n";
    }
    ++group;
  }
  for (const auto& g : report.influential_groups) {
    for (std::size_t k = 0; k < g.members.size(); ++k) {
      out += std::to_string(group) + "," + csv_field(g.members[k]) + "," + std::to_string(g.labels[k]) + ",influential,0\n";
    }
    ++group;
  }
  return out;
}

std::string kept_ids_csv(const AnalysisReport& report) {
  std::string out = "source_id\n";
  for (const auto& id : report.kept_ids) out += csv_field(id) + "\n";
  return out;
}

std::size_t representative(const std::vector<std::size_t>& members, const Eigen::MatrixXd& features) {
  if (members.empty()) throw UsageError("representative of an empty group");
  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(features.cols());
  for (std::size_t i : members) mean += features.row(static_cast<Eigen::Index>(i));
  mean /= static_cast<double>(members.size());
  std::size_t best = members.front();
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i : members) {
    const double dist = (features.row(static_cast<Eigen::Index>(i)) - mean).squaredNorm();
    if (dist < best_dist || (dist == best_dist && i < best)) {
      best = i;
      best_dist = dist;
    }
  }
  return best;
}

AnalysisReport partition_clusters(const LabeledDataset& dataset, const std::vector<int>& cluster_of,
                                  const Eigen::MatrixXd& features) {
  if (cluster_of.size() != dataset.size()) throw UsageError("cluster assignment does not cover the dataset");
  return partition_groups(dataset, members_by_cluster(cluster_of),
                          [&](const std::vector<std::size_t>& m) { return representative(m, features); });
}

std::string to_string(ClusteringMethod method) {
  switch (method) {
    case ClusteringMethod::kmeans: return "kmeans";
    case ClusteringMethod::agglomerative: return "agglomerative";
    case ClusteringMethod::spectral: return "spectral";
  }
  return "kmeans";
}

ClusteringMethod parse_clustering_method(const std::string& text) {
  if (text == "kmeans") return ClusteringMethod::kmeans;
  if (text == "agglomerative") return ClusteringMethod::agglomerative;
  if (text == "spectral") return ClusteringMethod::spectral;
  throw UsageError("unknown clustering method '" + text + "' (expected kmeans, agglomerative or spectral)");
}

AnalysisReport algorithm1(const LabeledDataset& dataset, const Algorithm1Options& options) {
  if (dataset.empty()) throw UsageError("algorithm1 needs a nonempty dataset");
  AnalysisReport timing;
  const CoefficientMatrix coeffs =
      run_stage(timing, "wavelet", [&] { return decompose_dataset(dataset, options.basis, options.levels); });
  const Eigen::Index n = coeffs.values.rows();
  const Eigen::Index d = coeffs.values.cols();

  nlohmann::ordered_json details;
  details["n"] = n;
  details["d"] = d;
  details["levels_used"] = coeffs.levels;
  Eigen::MatrixXd selected;
  run_stage(timing, "selection", [&] {
    std::optional<ColumnSelection> sel;
    if (n > d) {
      sel = select_columns(coeffs.values, options.tau);
      details["selection_rule"] = "condition_ceiling";
    } else if (options.stop_ratio > 0.0 && n > 1) {
      sel = select_columns_by_rank(coeffs.values, options.stop_ratio);
      details["selection_rule"] = "rank_tolerance";
    } else {
      details["selection_rule"] = "none";
    }
    if (sel) {
      selected = take_columns(coeffs.values, sel->column_indices);
      details["selected_columns"] = sel->m;
      details["constant_columns"] = sel->constant_columns.size();
      details["selection_condition_estimate"] = sel->condition_estimate;
    } else {
      selected = coeffs.values;
      details["selected_columns"] = d;
    }
  });

  std::vector<std::string> warnings;
  ClusteringMethod method = options.method;
  std::vector<int> cluster_of;
  Eigen::MatrixXd features = selected;
  run_stage(timing, "clustering", [&] {
    int n_c = 1;
    if (method != ClusteringMethod::agglomerative) {
      if (options.n_c) {
        n_c = *options.n_c;
        details["n_c_source"] = "override";
      } else if (n == 1) {
        details["n_c_source"] = "single_image";
      } else if (n > kMaxKernelImages) {
        throw UsageError("choosing n_c by eigen-gaps needs a dense " + std::to_string(n) + "x" + std::to_string(n) +
                         " kernel; set n_c explicitly above " + std::to_string(kMaxKernelImages) + " images");
      } else {
        n_c = eigen_gap_choice(selected, coeffs.image_ids, coeffs.basis, coeffs.levels, options.gamma, options.laplacian, details);
      }
      if (n_c < 1 || n_c > n) {
        throw UsageError("n_c must lie in [1, n]; got n_c=" + std::to_string(n_c) + " n=" + std::to_string(n));
      }
      details["n_c"] = n_c;
    }
    if (method == ClusteringMethod::kmeans && n > 10000 && n_c > 0.9 * static_cast<double>(n)) {
      warnings.push_back("n_c=" + std::to_string(n_c) + " is close to n=" + std::to_string(n) +
                         "; k-means replaced by agglomerative threshold clustering");
      method = ClusteringMethod::agglomerative;
    }
    switch (method) {
      case ClusteringMethod::kmeans: {
        KMeansOptions km;
        km.k = n_c;
        km.seed = options.seed;
        km.restarts = options.restarts;
        const ClusterAssignment a = kmeans(selected, km);
        cluster_of = a.cluster_of;
        details["inertia"] = *a.inertia;
        break;
      }
      case ClusteringMethod::agglomerative: {
        cluster_of = agglomerative_threshold(selected, options.distance_cutoff).cluster_of;
        details["distance_cutoff"] = options.distance_cutoff;
        break;
      }
      case ClusteringMethod::spectral: {
        if (n == 1) {
          cluster_of = {0};
          break;
        }
        CoefficientMatrix rows;
        rows.values = selected;
        rows.image_ids = coeffs.image_ids;
        const SpectralClustering s =
            spectral_clustering(laplacian(gaussian_similarity_matrix(rows), options.laplacian), n_c, options.seed, options.restarts);
        cluster_of = s.assignment.cluster_of;
        features = s.embedding;
        break;
      }
    }
    details["clustering_method"] = to_string(method);
    details["clusters"] = cluster_count(cluster_of);
  });

  AnalysisReport report = run_stage(timing, "partition", [&] { return partition_clusters(dataset, cluster_of, features); });
  report.procedure = "algorithm1";
  report.details = std::move(details);
  report.warnings = dataset.warnings;
  report.warnings.insert(report.warnings.end(), warnings.begin(), warnings.end());
  report.parameters = {{"basis", to_string(options.basis)},
                       {"levels", options.levels},
                       {"tau", options.tau},
                       {"stop_ratio", options.stop_ratio},
                       {"clustering_method", to_string(options.method)},
                       {"n_c", options.n_c ? nlohmann::ordered_json(*options.n_c) : nlohmann::ordered_json()},
                       {"gamma", options.gamma},
                       {"laplacian", to_string(options.laplacian)},
                       {"distance_cutoff", options.distance_cutoff},
                       {"seed", options.seed},
                       {"restarts", options.restarts}};
  report.timings = std::move(timing.timings);
  validate_report(report, dataset);
  return report;
}

Algorithm2Result algorithm2(const LabeledDataset& dataset, const Algorithm2Options& options) {
  if (dataset.empty()) throw UsageError("algorithm2 needs a nonempty dataset");
  if (dataset.size() == 1) {
    Algorithm2Result out;
    out.report.procedure = "algorithm2";
    out.report.kept_ids = dataset.source_ids;
    out.report.warnings = dataset.warnings;
    out.report.details = {{"n", 1}, {"n_c", 1}, {"n_c_source", "single_image"}};
    out.similarity.values = Eigen::MatrixXd::Ones(1, 1);
    out.similarity.row_ids = out.similarity.col_ids = dataset.source_ids;
    out.similarity.measure = options.similarity.measure;
    out.similarity.symmetric = true;
    out.spectrum.eigenvalues = Eigen::VectorXd::Zero(1);
    out.spectrum.n = 1;
    out.spectrum.construction = options.laplacian;
    return out;
  }
  AnalysisReport timing;
  SimilarityMatrix s = run_stage(timing, "similarity", [&] { return similarity_matrix(dataset, options.similarity); });
  Algorithm2Result out = algorithm2(dataset, std::move(s), options);
  out.report.timings.insert(out.report.timings.begin(), timing.timings.begin(), timing.timings.end());
  return out;
}

Algorithm2Result algorithm2(const LabeledDataset& dataset, SimilarityMatrix similarity, const Algorithm2Options& options) {
  const Eigen::Index n = similarity.values.rows();
  if (n < 1 || static_cast<std::size_t>(n) != dataset.size() || !similarity.symmetric) {
    throw UsageError("algorithm2 needs a symmetric similarity matrix over the dataset");
  }
  AnalysisReport timing;
  Algorithm2Result out;
  const Laplacian l = run_stage(timing, "laplacian", [&] { return laplacian(similarity, options.laplacian); });
  out.spectrum = run_stage(timing, "spectrum", [&] { return laplacian_spectrum(l); });

  nlohmann::ordered_json details;
  details["n"] = n;
  details["clamped_count"] = l.clamped_count;
  details["laplacian"] = to_string(l.kind);
  if (options.n_c) {
    out.n_c = *options.n_c;
    details["n_c_source"] = "override";
  } else {
    out.n_c = eigen_gap_count(out.spectrum.eigenvalues, options.gamma);
    details["n_c_source"] = "eigen_gap";
  }
  if (out.n_c < 1 || out.n_c > n) {
    throw UsageError("n_c must lie in [1, n]; got n_c=" + std::to_string(out.n_c) + " n=" + std::to_string(n));
  }
  details["n_c"] = out.n_c;

  const SpectralClustering sc =
      run_stage(timing, "clustering", [&] { return spectral_clustering(l, out.n_c, options.seed, options.restarts); });
  details["clusters"] = cluster_count(sc.assignment.cluster_of);

  out.report = run_stage(timing, "partition", [&] { return partition_clusters(dataset, sc.assignment.cluster_of, sc.embedding); });
  out.report.procedure = "algorithm2";
  out.report.details = std::move(details);
  out.report.warnings = dataset.warnings;
  if (l.clamped_count > 0) {
    out.report.warnings.push_back(std::to_string(l.clamped_count) + " negative similarities clamped to 0 in the Laplacian");
  }
  out.report.parameters = {{"measure", to_string(similarity.measure)},
                           {"similarity_params", similarity.params},
                           {"gamma", options.gamma},
                           {"n_c", options.n_c ? nlohmann::ordered_json(*options.n_c) : nlohmann::ordered_json()},
                           {"laplacian", to_string(options.laplacian)},
                           {"seed", options.seed},
                           {"restarts", options.restarts}};
  out.report.timings = std::move(timing.timings);
  out.similarity = std::move(similarity);
  validate_report(out.report, dataset);
  return out;
}

AnalysisReport dedupe_by_threshold(const SimilarityMatrix& similarity, const std::vector<int>& labels,
                                   double similarity_threshold) {
  if (!(similarity_threshold > -1.0 && similarity_threshold <= 1.0)) {
    throw UsageError("dedupe threshold must lie in (-1, 1]");
  }
  const Eigen::MatrixXd& s = similarity.values;
  const auto n = static_cast<std::size_t>(s.rows());
  if (!similarity.symmetric || s.rows() != s.cols()) throw UsageError("dedupe needs a symmetric similarity matrix");
  if (labels.size() != n || similarity.row_ids.size() != n) throw UsageError("dedupe needs one label and id per row");

  std::vector<std::pair<std::size_t, std::size_t>> edges;
  double min_off = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (v != s(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i))) throw UsageError("dedupe needs a symmetric similarity matrix");
      min_off = std::min(min_off, v);
      if (v >= similarity_threshold) edges.emplace_back(i, j);
    }
  }

  LabeledDataset view;
  view.labels = labels;
  view.source_ids = similarity.row_ids;
  view.images.resize(n);
  const auto groups = members_by_cluster(connected_components(n, edges));
  AnalysisReport report = partition_groups(view, groups, [&](const std::vector<std::size_t>& members) {
    std::size_t best = members.front();
    double best_total = -std::numeric_limits<double>::infinity();
    for (std::size_t i : members) {
      double total = 0.0;
      for (std::size_t j : members) {
        if (j != i) total += s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
      if (total > best_total) {
        best = i;
        best_total = total;
      }
    }
    return best;
  });
  report.procedure = "dedupe";
  report.parameters = {{"measure", to_string(similarity.measure)},
                       {"similarity_params", similarity.params},
                       {"threshold", similarity_threshold}};
  report.details = {{"n", n}, {"edges", edges.size()}, {"components", groups.size()}};
  if (n > 1 && similarity_threshold <= min_off) {
    report.warnings.push_back("threshold " + json_number(similarity_threshold) +
                              " is at or below every pairwise similarity; all images form one component");
  }
  validate_report(report, view);
  return report;
}

double near_identical_fraction(const Eigen::MatrixXd& cross, double threshold) {
  if (cross.rows() == 0 || cross.cols() == 0) return 0.0;
  Eigen::Index hits = 0;
  for (Eigen::Index t = 0; t < cross.rows(); ++t) {
    if (cross.row(t).maxCoeff() >= threshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(cross.rows());
}

CrossSetReport cross_set_report(const SimilarityMatrix& cross, const std::vector<int>& train_labels,
                                const std::vector<int>& test_labels, double near_identical_threshold) {
  const Eigen::MatrixXd& s = cross.values;
  if (static_cast<std::size_t>(s.rows()) != test_labels.size() || static_cast<std::size_t>(s.cols()) != train_labels.size() ||
      cross.row_ids.size() != test_labels.size() || cross.col_ids.size() != train_labels.size()) {
    throw UsageError("cross-set matrix does not match the train and test label lists");
  }
  if (s.cols() == 0) throw UsageError("cross-set report needs a nonempty train set");
  CrossSetReport out;
  out.near_identical_threshold = near_identical_threshold;
  out.near_identical_fraction = near_identical_fraction(s, near_identical_threshold);
  out.parameters = {{"measure", to_string(cross.measure)}, {"similarity_params", cross.params},
                    {"near_identical_threshold", near_identical_threshold}};
  for (Eigen::Index t = 0; t < s.rows(); ++t) {
    CrossMatch m;
    m.test_id = cross.row_ids[static_cast<std::size_t>(t)];
    m.test_label = test_labels[static_cast<std::size_t>(t)];
    Eigen::Index best = 0;
    for (Eigen::Index r = 0; r < s.cols(); ++r) {
      const double v = s(t, r);
      if (v > s(t, best)) best = r;
      auto& slot = train_labels[static_cast<std::size_t>(r)] == m.test_label ? m.best_same_label : m.best_other_label;
      if (!slot || v > *slot) slot = v;
    }
    m.best_train_id = cross.col_ids[static_cast<std::size_t>(best)];
    m.best_train_label = train_labels[static_cast<std::size_t>(best)];
    m.max_similarity = s(t, best);
    if (m.best_other_label && (!m.best_same_label || *m.best_other_label > *m.best_same_label)) {
      out.cross_label.push_back(static_cast<std::size_t>(t));
    }
    out.matches.push_back(std::move(m));
  }
  out.dissimilarity_ranking.resize(out.matches.size());
  std::iota(out.dissimilarity_ranking.begin(), out.dissimilarity_ranking.end(), std::size_t{0});
  std::stable_sort(out.dissimilarity_ranking.begin(), out.dissimilarity_ranking.end(), [&](std::size_t a, std::size_t b) {
    return out.matches[a].max_similarity < out.matches[b].max_similarity;
  });
  return out;
}

nlohmann::ordered_json to_json(const CrossSetReport& report) {
  const auto optional_number = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json();
  };
  nlohmann::ordered_json j;
  j["parameters"] = report.parameters;
  j["summary"] = {{"test_images", report.matches.size()},
                  {"near_identical_threshold", report.near_identical_threshold},
                  {"near_identical_fraction", report.near_identical_fraction},
                  {"cross_label_count", report.cross_label.size()}};
  auto& ranking = j["most_dissimilar"] = nlohmann::ordered_json::array();
  for (std::size_t t : report.dissimilarity_ranking) {
    ranking.push_back({{"test_id", report.matches[t].test_id}, {"max_similarity", report.matches[t].max_similarity}});
  }
  auto& cross = j["cross_label"] = nlohmann::ordered_json::array();
  for (std::size_t t : report.cross_label) {
    const CrossMatch& m = report.matches[t];
    cross.push_back({{"test_id", m.test_id},
                     {"test_label", m.test_label},
                     {"best_same_label", optional_number(m.best_same_label)},
                     {"best_other_label", optional_number(m.best_other_label)}});
  }
  auto& matches = j["matches"] = nlohmann::ordered_json::array();
  for (const CrossMatch& m : report.matches) {
    matches.push_back({{"test_id", m.test_id},
                       {"test_label", m.test_label},
                       {"best_train_id", m.best_train_id},
                       {"best_train_label", m.best_train_label},
                       {"max_similarity", m.max_similarity}});
  }
  return j;
}

AnalysisReport per_class(const LabeledDataset& dataset, const std::function<AnalysisReport(const LabeledDataset&)>& analyze) {
  AnalysisReport merged;
  std::set<std::string> kept;
  std::vector<int> present(dataset.labels.begin(), dataset.labels.end());
  std::sort(present.begin(), present.end());
  present.erase(std::unique(present.begin(), present.end()), present.end());
  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (int label : present) {
    const AnalysisReport part = analyze(dataset.filter_label(label));
    merged.procedure = part.procedure;
    merged.parameters = part.parameters;
    classes.push_back({{"label", label}, {"details", part.details}});
    merged.redundant_groups.insert(merged.redundant_groups.end(), part.redundant_groups.begin(), part.redundant_groups.end());
    merged.influential_groups.insert(merged.influential_groups.end(), part.influential_groups.begin(),
                                     part.influential_groups.end());
    kept.insert(part.kept_ids.begin(), part.kept_ids.end());
    for (const auto& [stage, seconds] : part.timings) merged.timings.emplace_back("class " + std::to_string(label) + " " + stage, seconds);
    for (const auto& w : part.warnings) {
      if (std::find(merged.warnings.begin(), merged.warnings.end(), w) == merged.warnings.end()) merged.warnings.push_back(w);
    }
  }
  for (const auto& id : dataset.source_ids) {
    if (kept.count(id)) merged.kept_ids.push_back(id);
  }
  merged.details = {{"per_class", true}, {"classes", classes}};
  validate_report(merged, dataset);
  return merged;
}

CoefficientStats coefficient_stats(const CoefficientMatrix& coefficients, double tau, ConditionMode mode) {
  const Eigen::MatrixXd& w = coefficients.values;
  CoefficientStats out;
  out.rows = w.rows();
  out.cols = w.cols();
  std::vector<Eigen::Index> nonzero;
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    if ((w.col(j).array() == 0.0).all()) {
      out.zero_columns.push_back(j);
    } else {
      nonzero.push_back(j);
    }
  }
  if (nonzero.empty()) throw NumericalError("every coefficient column is zero");
  out.condition = condition_number(take_columns(w, nonzero), mode);
  if (w.rows() > 1) {
    try {
      out.selection = select_columns(w, tau);
    } catch (const NumericalError&) {
      // every column constant: nothing to select, reported as absent
    }
  }
  return out;
}

nlohmann::ordered_json to_json(const CoefficientStats& stats) {
  const auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(); };
  nlohmann::ordered_json j;
  j["rows"] = stats.rows;
  j["cols"] = stats.cols;
  j["zero_column_count"] = stats.zero_columns.size();
  j["zero_columns"] = stats.zero_columns;
  j["condition"] = {{"mode", stats.condition.mode == ConditionMode::exact ? "exact" : "fast"},
                    {"value", finite_or_null(stats.condition.value)},
                    {"raw_ratio", finite_or_null(stats.condition.raw_ratio)},
                    {"rank_deficient", stats.condition.rank_deficient}};
  if (stats.selection) {
    j["selection"] = {{"m", stats.selection->m},
                      {"condition_estimate", stats.selection->condition_estimate},
                      {"constant_columns", stats.selection->constant_columns.size()}};
  } else {
    j["selection"] = nullptr;
  }
  return j;
}

}  // namespace wavesim
