#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "wavesim/errors.hpp"
#include "wavesim/parallel.hpp"
#include "wavesim/pipeline.hpp"

using namespace wavesim;

namespace {

struct WorkerGuard {
  std::size_t saved = worker_count();
  ~WorkerGuard() { set_worker_count(saved); }
};

// `n` random 8x8 grayscale images; `duplicates` lists (original, copy) pairs.
LabeledDataset synthetic(std::mt19937_64& g, int n, int classes, const std::vector<std::pair<int, int>>& duplicates = {}) {
  LabeledDataset d;
  for (int c = 0; c < classes; ++c) d.class_names.push_back("c" + std::to_string(c));
  for (int i = 0; i < n; ++i) {
    d.images.push_back(oracle::random_image(g, 8, 8, 1));
    d.labels.push_back(static_cast<int>(g() % static_cast<std::uint64_t>(classes)));
    d.source_ids.push_back("s" + std::to_string(i));
  }
  for (const auto& [a, b] : duplicates) {
    d.images[static_cast<std::size_t>(b)] = d.images[static_cast<std::size_t>(a)];
    d.labels[static_cast<std::size_t>(b)] = d.labels[static_cast<std::size_t>(a)];
  }
  return d;
}

SimilarityMatrix wrap(const Eigen::MatrixXd& values) {
  SimilarityMatrix s;
  s.values = values;
  s.symmetric = true;
  for (Eigen::Index i = 0; i < values.rows(); ++i) s.row_ids.push_back("n" + std::to_string(i));
  s.col_ids = s.row_ids;
  return s;
}

const RedundantGroup* group_containing(const AnalysisReport& r, const std::string& id) {
  for (const auto& g : r.redundant_groups) {
    if (std::find(g.members.begin(), g.members.end(), id) != g.members.end()) return &g;
  }
  return nullptr;
}

// Group index per node from a report (singletons get their own index).
std::vector<int> partition_of(const AnalysisReport& r, const std::vector<std::string>& ids) {
  std::map<std::string, int> group;
  int next = 0;
  for (const auto& g : r.redundant_groups) {
    for (const auto& m : g.members) group[m] = next;
    ++next;
  }
  for (const auto& g : r.influential_groups) {
    for (const auto& m : g.members) group[m] = next;
    ++next;
  }
  std::vector<int> out;
  for (const auto& id : ids) out.push_back(group.count(id) ? group[id] : next++);
  return out;
}

}  // namespace

TEST_CASE("representative: closest to the mean, ties to the lowest index") {
  Eigen::MatrixXd x(3, 1);
  x << 0, 1, 10;
  CHECK(representative({0, 1, 2}, x) == 1);
  CHECK(representative({2}, x) == 2);
  Eigen::MatrixXd pair(2, 1);
  pair << -1, 1;
  CHECK(representative({0, 1}, pair) == 0);
  CHECK(representative({1, 0}, pair) == 0);
  CHECK_THROWS_AS(representative({}, x), UsageError);
}

TEST_CASE("algorithm1: distinct images with n_c = n give no groups") {
  auto g = oracle::rng(51);
  const auto data = synthetic(g, 10, 3);
  Algorithm1Options o;
  o.n_c = 10;
  const auto r = algorithm1(data, o);
  CHECK(r.redundant_groups.empty());
  CHECK(r.influential_groups.empty());
  CHECK(r.kept_ids == data.source_ids);
}

TEST_CASE("algorithm1: a planted duplicate pair becomes one redundant group") {
  auto g = oracle::rng(52);
  const auto data = synthetic(g, 10, 3, {{2, 7}});
  Algorithm1Options o;
  o.n_c = 9;
  o.basis = BasisName::haar;
  const auto r = algorithm1(data, o);
  REQUIRE(r.redundant_groups.size() == 1);
  CHECK(r.redundant_groups[0].members == std::vector<std::string>{"s2", "s7"});
  CHECK(r.redundant_groups[0].representative == "s2");
  CHECK(r.kept_ids.size() == 9);
  CHECK(r.details["n_c_source"] == "override");
}

TEST_CASE("algorithm1: methods, default n_c, single image, errors") {
  auto g = oracle::rng(53);
  const auto data = synthetic(g, 12, 2, {{0, 5}, {1, 9}});
  Algorithm1Options o;
  const auto auto_nc = algorithm1(data, o);
  CHECK(auto_nc.details["n_c_source"] == "eigen_gap");
  CHECK(auto_nc.details["n_c"].get<int>() >= 1);

  o.method = ClusteringMethod::agglomerative;
  const auto agg = algorithm1(data, o);
  CHECK(agg.redundant_groups.size() == 2);
  CHECK(agg.kept_ids.size() == 10);

  o.method = ClusteringMethod::spectral;
  o.n_c = 10;
  const auto spec = algorithm1(data, o);
  CHECK(group_containing(spec, "s0") == group_containing(spec, "s5"));

  const auto one = algorithm1(data.subset(std::vector<std::size_t>{3}), Algorithm1Options{});
  CHECK(one.kept_ids == std::vector<std::string>{"s3"});

  Algorithm1Options too_many;
  too_many.n_c = 13;
  CHECK_THROWS_WITH_AS(algorithm1(data, too_many), doctest::Contains("clustering"), UsageError);
  CHECK_THROWS_AS(algorithm1(LabeledDataset{}, Algorithm1Options{}), UsageError);
}

TEST_CASE("algorithm1 column selection: condition ceiling when n > d, rank tolerance otherwise") {
  auto g = oracle::rng(54);
  const auto tall = synthetic(g, 80, 2);  // 80 images of 64 coefficients
  Algorithm1Options o;
  o.n_c = 5;
  o.basis = BasisName::haar;
  const auto r = algorithm1(tall, o);
  CHECK(r.details["selection_rule"] == "condition_ceiling");
  CHECK(r.details["selected_columns"].get<int>() <= 64);

  const auto wide = synthetic(g, 20, 2);
  o.stop_ratio = 1e-5;
  const auto w = algorithm1(wide, o);
  CHECK(w.details["selection_rule"] == "rank_tolerance");
  CHECK(w.details["selected_columns"].get<int>() == 20);
  o.stop_ratio = 0.0;
  CHECK(algorithm1(wide, o).details["selection_rule"] == "none");
}

TEST_CASE("algorithm2: planted blocks, override, single image") {
  // K4 + K5 with unit weights: spectrum 0, 0, 4, 4, 4, 5, 5, 5, 5.
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(9, 9);
  s.topLeftCorner(4, 4).setOnes();
  s.bottomRightCorner(5, 5).setOnes();
  LabeledDataset data;
  data.class_names = {"a", "b"};
  for (int i = 0; i < 9; ++i) {
    data.images.emplace_back(2, 2, 1);
    data.labels.push_back(i < 4 ? 0 : 1);
    data.source_ids.push_back("n" + std::to_string(i));
  }
  Algorithm2Options o;
  o.gamma = 0.5;
  const auto r = algorithm2(data, wrap(s), o);
  CHECK(r.n_c == 2);
  CHECK(r.report.details["n_c_source"] == "eigen_gap");
  REQUIRE(r.report.redundant_groups.size() == 2);
  CHECK(r.report.redundant_groups[0].members.size() == 4);
  CHECK(r.report.redundant_groups[1].members.size() == 5);
  o.gamma = 2.0;
  CHECK(algorithm2(data, wrap(s), o).n_c == 1);
  o.n_c = 2;
  const auto forced = algorithm2(data, wrap(s), o);
  CHECK(forced.report.redundant_groups.size() == 2);
  CHECK(forced.report.kept_ids.size() == 2);
  CHECK(forced.report.details["n_c_source"] == "override");

  const auto single = algorithm2(data.subset(std::vector<std::size_t>{0}), Algorithm2Options{});
  CHECK(single.report.kept_ids == std::vector<std::string>{"n0"});
  CHECK(single.report.redundant_groups.empty());
}

TEST_CASE("algorithm2 end to end on images keeps exact duplicates together") {
  auto g = oracle::rng(56);
  const auto data = synthetic(g, 10, 1, {{1, 6}});
  Algorithm2Options o;
  o.similarity.ssim.window_size = 3;
  o.n_c = 3;
  const auto r = algorithm2(data, o);
  const auto* grp = group_containing(r.report, "s1");
  REQUIRE(grp != nullptr);
  CHECK(std::find(grp->members.begin(), grp->members.end(), "s6") != grp->members.end());
  CHECK(r.similarity.values(1, 6) == 1.0);
}

TEST_CASE("dedupe examples") {
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(4, 4) * 1.0;
  s(0, 2) = s(2, 0) = 1.0;
  s(1, 3) = s(3, 1) = 0.7;
  const auto r = dedupe_by_threshold(wrap(s), {0, 0, 0, 1}, 1.0);
  REQUIRE(r.redundant_groups.size() == 1);
  CHECK(r.redundant_groups[0].members == std::vector<std::string>{"n0", "n2"});
  CHECK(r.kept_ids.size() == 3);

  const auto giant = dedupe_by_threshold(wrap(s), {0, 0, 0, 0}, -0.5);
  CHECK(giant.redundant_groups.size() == 1);
  CHECK(giant.redundant_groups[0].members.size() == 4);
  CHECK_FALSE(giant.warnings.empty());

  const auto mixed = dedupe_by_threshold(wrap(s), {0, 1, 0, 0}, 0.6);
  CHECK(mixed.influential_groups.size() == 1);
  CHECK_THROWS_AS(dedupe_by_threshold(wrap(s), {0, 0, 0, 0}, -1.0), UsageError);
}

TEST_CASE("dedupe: 3 planted duplicates + 7 distinct at 0.95") {
  auto g = oracle::rng(57);
  auto data = synthetic(g, 10, 1, {{0, 4}, {0, 8}});
  SimilarityOptions o;
  o.ssim.window_size = 3;
  const auto s = similarity_matrix(data, o);
  const auto r = dedupe_by_threshold(s, data.labels, 0.95);
  CHECK(oracle::same_partition(partition_of(r, data.source_ids), oracle::components(s.values, 0.95)));
  REQUIRE(r.redundant_groups.size() == 1);
  CHECK(r.redundant_groups[0].members.size() == 3);
  CHECK(r.kept_ids.size() == 8);
}

TEST_CASE("dedupe refinement: a higher threshold only splits groups") {
  auto g = oracle::rng(58);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd r = oracle::random_matrix(g, 15, 15);
    Eigen::MatrixXd s = (r + r.transpose()) / 2;
    s.diagonal().setOnes();
    const std::vector<int> labels(15, 0);
    const double t1 = oracle::uniform(g, -0.5, 0.5);
    const double t2 = t1 + oracle::uniform(g, 0.0, 0.5);
    const auto coarse = partition_of(dedupe_by_threshold(wrap(s), labels, t1), wrap(s).row_ids);
    const auto fine = partition_of(dedupe_by_threshold(wrap(s), labels, t2), wrap(s).row_ids);
    for (int i = 0; i < 15; ++i) {
      for (int j = 0; j < 15; ++j) {
        if (fine[static_cast<std::size_t>(i)] == fine[static_cast<std::size_t>(j)]) {
          CHECK(coarse[static_cast<std::size_t>(i)] == coarse[static_cast<std::size_t>(j)]);
        }
      }
    }
  }
}

TEST_CASE("partition invariants and planted-duplicate recall over randomized datasets") {
  auto g = oracle::rng(59);
  int planted = 0;
  int recalled = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 8 + static_cast<int>(g() % 10);
    std::vector<std::pair<int, int>> dups;
    std::set<int> used;
    const int pairs = 1 + static_cast<int>(g() % 3);
    while (static_cast<int>(dups.size()) < pairs) {
      const int a = static_cast<int>(g() % static_cast<std::uint64_t>(n));
      const int b = static_cast<int>(g() % static_cast<std::uint64_t>(n));
      if (a == b || used.count(a) || used.count(b)) continue;
      used.insert(a);
      used.insert(b);
      dups.emplace_back(std::min(a, b), std::max(a, b));
    }
    const auto data = synthetic(g, n, 3, dups);
    Algorithm1Options o;
    o.basis = trial % 2 ? BasisName::haar : BasisName::db2;
    o.seed = g();
    o.n_c = n - pairs;  // one cluster per distinct image
    const auto r = algorithm1(data, o);
    CHECK_NOTHROW(validate_report(r, data));
    CHECK(r.kept_ids.size() == static_cast<std::size_t>(n - pairs));
    for (const auto& [a, b] : dups) {
      ++planted;
      const auto* grp = group_containing(r, data.source_ids[static_cast<std::size_t>(a)]);
      if (grp && std::find(grp->members.begin(), grp->members.end(), data.source_ids[static_cast<std::size_t>(b)]) != grp->members.end()) {
        ++recalled;
      }
    }
  }
  CHECK(recalled == planted);
}

TEST_CASE("validate_report rejects broken partitions") {
  auto g = oracle::rng(60);
  const auto data = synthetic(g, 4, 1, {{0, 1}});
  AnalysisReport r;
  r.kept_ids = data.source_ids;
  CHECK_NOTHROW(validate_report(r, data));
  r.redundant_groups.push_back({{"s0", "s1"}, data.labels[0], "s0"});
  CHECK_THROWS_AS(validate_report(r, data), NumericalError);  // s1 still kept
  r.kept_ids = {"s0", "s2", "s3"};
  CHECK_NOTHROW(validate_report(r, data));
  r.kept_ids.push_back("s9");
  CHECK_THROWS_AS(validate_report(r, data), NumericalError);
}

TEST_CASE("reports are deterministic across runs and worker counts") {
  WorkerGuard guard;
  auto g = oracle::rng(61);
  const auto data = synthetic(g, 30, 3, {{0, 10}, {3, 20}});
  Algorithm1Options o;
  o.seed = 7;
  set_worker_count(1);
  const auto a = algorithm1(data, o);
  set_worker_count(8);
  const auto b = algorithm1(data, o);
  CHECK(report_digest(a) == report_digest(b));
  CHECK(to_json(a, false).dump() == to_json(b, false).dump());
  CHECK(report_digest(a).size() == 16);
}

TEST_CASE("cross-set report") {
  auto g = oracle::rng(62);
  const auto train = synthetic(g, 6, 2);
  const auto test = train.subset(std::vector<std::size_t>{1, 4});
  SimilarityOptions o;
  o.ssim.window_size = 3;
  const auto c = cross_similarity(train, test, o);
  const auto r = cross_set_report(c, train.labels, test.labels, 1.0);
  CHECK(r.near_identical_fraction == 1.0);
  CHECK(r.matches[0].best_train_id == "s1");
  CHECK(r.cross_label.empty());

  const auto other = synthetic(g, 3, 2);
  const auto far = cross_set_report(cross_similarity(train, other, o), train.labels, other.labels, 1.0);
  CHECK(far.near_identical_fraction == 0.0);
  CHECK(far.dissimilarity_ranking.size() == 3);
  for (std::size_t k = 1; k < 3; ++k) {
    CHECK(far.matches[far.dissimilarity_ranking[k]].max_similarity >= far.matches[far.dissimilarity_ranking[k - 1]].max_similarity);
  }

  SimilarityMatrix m;
  m.values.resize(1, 2);
  m.values << 0.3, 0.8;
  m.row_ids = {"t"};
  m.col_ids = {"a", "b"};
  const auto flagged = cross_set_report(m, {0, 1}, {0}, 0.9);
  CHECK(flagged.cross_label == std::vector<std::size_t>{0});
  CHECK(flagged.matches[0].best_train_label == 1);
}

TEST_CASE("per-class analysis merges partitions") {
  auto g = oracle::rng(63);
  auto data = synthetic(g, 12, 2, {{0, 3}});
  const auto merged = per_class(data, [](const LabeledDataset& part) {
    Algorithm1Options o;
    o.method = ClusteringMethod::agglomerative;
    return algorithm1(part, o);
  });
  CHECK(merged.redundant_groups.size() == 1);
  CHECK(merged.kept_ids.size() == 11);
}

TEST_CASE("coefficient stats: zero columns and selection") {
  CoefficientMatrix m;
  auto g = oracle::rng(64);
  m.values = oracle::random_matrix(g, 30, 6);
  m.values.col(2).setZero();
  const auto s = coefficient_stats(m, 1e5, ConditionMode::exact);
  CHECK(s.zero_columns == std::vector<Eigen::Index>{2});
  CHECK(std::isfinite(s.condition.value));
  REQUIRE(s.selection.has_value());
  CHECK(s.selection->m == 5);
  const auto j = to_json(s);
  CHECK(j["zero_column_count"] == 1);
  CoefficientMatrix one;
  one.values = Eigen::MatrixXd::Ones(1, 4);
  CHECK_FALSE(coefficient_stats(one, 1e5, ConditionMode::automatic).selection.has_value());
}

TEST_CASE("CSV exports") {
  AnalysisReport r;
  r.redundant_groups.push_back({{"a", "b"}, 1, "b"});
  r.influential_groups.push_back({{"c", "d"}, {0, 2}});
  r.kept_ids = {"b", "c", "d"};
  CHECK(groups_csv(r) ==
        "group_id,member_id,label,role,representative_flag\n0,a,1,redundant,0\n0,b,1,redundant,1\n"
        "1,c,0,influential,0\n1,d,2,influential,0\n");
  CHECK(kept_ids_csv(r) == "source_id\nb\nc\nd\n");
}
