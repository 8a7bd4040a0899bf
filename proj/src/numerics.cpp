#include "wavesim/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "wavesim/errors.hpp"
#include "wavesim/parallel.hpp"

namespace wavesim {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

bool is_constant_column(const Eigen::MatrixXd& m, Eigen::Index j) {
  const double first = m(0, j);
  for (Eigen::Index i = 1; i < m.rows(); ++i) {
    if (m(i, j) != first) return false;
  }
  return true;
}

void check_symmetric(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() < 1) throw UsageError("matrix must be square and nonempty");
  const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
  const double asym = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= 1e-10 * scale)) throw UsageError("matrix is not symmetric (max asymmetry " + std::to_string(asym) + ")");
}

// `keep(r11, rkk)` decides whether pivot k still belongs to the selection;
// it must be monotone along the non-increasing R diagonal.
template <typename Keep>
ColumnSelection select_with_ratio(const Eigen::MatrixXd& matrix, double stop_ratio, Keep keep) {
  if (matrix.rows() < 1 || matrix.cols() < 1) throw UsageError("cannot select columns of an empty matrix");
  ColumnSelection out;
  std::vector<Eigen::Index> varying;
  for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
    if (is_constant_column(matrix, j)) {
      out.constant_columns.push_back(j);
    } else {
      varying.push_back(j);
    }
  }
  if (varying.empty()) throw NumericalError("every column is constant across rows; nothing to select");

  const PivotedQRResult qr = pivoted_qr(take_columns(matrix, varying), stop_ratio);
  out.r_diagonal = qr.r_diagonal;
  if (qr.r_diagonal.empty()) throw NumericalError("no nonzero pivot found");
  const double r11 = qr.r_diagonal.front();
  Eigen::Index m = 0;
  for (double r : qr.r_diagonal) {
    if (!keep(r11, r)) break;
    ++m;
  }
  if (m < 1) throw NumericalError("no column satisfies the conditioning bound");
  out.m = m;
  out.condition_estimate = qr.condition_estimate(m);
  for (Eigen::Index k = 0; k < m; ++k) out.column_indices.push_back(varying[static_cast<std::size_t>(qr.permutation[k])]);
  return out;
}

}  // namespace

Eigen::Index PivotedQRResult::numerical_rank(double tolerance) const {
  if (r_diagonal.empty()) return 0;
  Eigen::Index rank = 0;
  for (double r : r_diagonal) {
    if (r < tolerance * r_diagonal.front()) break;
    ++rank;
  }
  return rank;
}

double PivotedQRResult::condition_estimate(Eigen::Index m) const {
  if (m < 1 || static_cast<std::size_t>(m) > r_diagonal.size()) throw UsageError("condition estimate index out of range");
  const double last = r_diagonal[static_cast<std::size_t>(m - 1)];
  return last > 0.0 ? r_diagonal.front() / last : std::numeric_limits<double>::infinity();
}

PivotedQRResult pivoted_qr(const Eigen::MatrixXd& matrix, double stop_ratio, bool keep_q) {
  const Eigen::Index n = matrix.rows();
  const Eigen::Index d = matrix.cols();
  if (n < 1 || d < 1) throw UsageError("pivoted_qr needs a nonempty matrix");
  if (stop_ratio < 0.0 || stop_ratio > 1.0) throw UsageError("stop_ratio must lie in [0, 1]");

  Eigen::MatrixXd a = matrix;
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(d));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::vector<double> norms(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) norms[static_cast<std::size_t>(j)] = a.col(j).norm();
  std::vector<double> taus;

  PivotedQRResult out;
  const Eigen::Index steps = std::min(n, d);
  for (Eigen::Index k = 0; k < steps; ++k) {
    Eigen::Index p = k;
    for (Eigen::Index j = k + 1; j < d; ++j) {
      if (norms[static_cast<std::size_t>(j)] > norms[static_cast<std::size_t>(p)]) p = j;
    }
    if (!(norms[static_cast<std::size_t>(p)] > 0.0)) break;
    if (p != k) {
      a.col(k).swap(a.col(p));
      std::swap(norms[static_cast<std::size_t>(k)], norms[static_cast<std::size_t>(p)]);
      std::swap(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(p)]);
    }

    const Eigen::Index len = n - k;
    const double alpha = a(k, k);
    const double xnorm = norms[static_cast<std::size_t>(k)];
    const double beta = len == 1 ? alpha : (alpha >= 0.0 ? -xnorm : xnorm);
    double tau = 0.0;
    Eigen::VectorXd v = a.col(k).tail(len);
    if (len > 1) {
      tau = (beta - alpha) / beta;
      v /= (alpha - beta);
      v(0) = 1.0;
    }
    a(k, k) = beta;
    if (len > 1) a.col(k).tail(len - 1) = v.tail(len - 1);
    taus.push_back(tau);
    out.r_diagonal.push_back(xnorm);
    out.columns_processed = k + 1;

    parallel_for(static_cast<std::size_t>(k + 1), static_cast<std::size_t>(d), [&](std::size_t jj) {
      const auto j = static_cast<Eigen::Index>(jj);
      auto col = a.col(j).tail(len);
      if (tau != 0.0) {
        const double w = v.dot(col);
        col -= (tau * w) * v;
      }
      norms[jj] = len > 1 ? col.tail(len - 1).norm() : 0.0;
    });

    if (stop_ratio > 0.0 && xnorm < stop_ratio * out.r_diagonal.front()) break;
  }

  // Unprocessed columns follow in descending residual-norm order.
  const Eigen::Index kp = out.columns_processed;
  std::vector<Eigen::Index> rest(static_cast<std::size_t>(d - kp));
  std::iota(rest.begin(), rest.end(), kp);
  std::stable_sort(rest.begin(), rest.end(), [&](Eigen::Index x, Eigen::Index y) {
    const double nx = norms[static_cast<std::size_t>(x)];
    const double ny = norms[static_cast<std::size_t>(y)];
    if (nx != ny) return nx > ny;
    return perm[static_cast<std::size_t>(x)] < perm[static_cast<std::size_t>(y)];
  });
  out.permutation.assign(perm.begin(), perm.begin() + kp);
  for (Eigen::Index pos : rest) out.permutation.push_back(perm[static_cast<std::size_t>(pos)]);

  out.r = Eigen::MatrixXd::Zero(kp, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const Eigen::Index src = j < kp ? j : rest[static_cast<std::size_t>(j - kp)];
    const Eigen::Index rows = std::min(kp, j + 1);
    out.r.col(j).head(rows) = a.col(src).head(rows);
  }

  if (keep_q) {
    Eigen::MatrixXd q = Eigen::MatrixXd::Identity(n, kp);
    for (Eigen::Index k = kp - 1; k >= 0; --k) {
      const double tau = taus[static_cast<std::size_t>(k)];
      if (tau == 0.0) continue;
      const Eigen::Index len = n - k;
      Eigen::VectorXd v(len);
      v(0) = 1.0;
      v.tail(len - 1) = a.col(k).tail(len - 1);
      auto block = q.bottomRows(len);
      const Eigen::RowVectorXd w = v.transpose() * block;
      block -= tau * v * w;
    }
    out.q = std::move(q);
  }
  return out;
}

Eigen::MatrixXd take_columns(const Eigen::MatrixXd& matrix, const std::vector<Eigen::Index>& columns) {
  Eigen::MatrixXd out(matrix.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = matrix.col(columns[k]);
  return out;
}

ColumnSelection select_columns(const Eigen::MatrixXd& matrix, double tau) {
  if (!(tau > 1.0)) throw UsageError("tau must exceed 1");
  return select_with_ratio(matrix, 1.0 / tau, [tau](double r11, double r) { return r > 0.0 && r11 / r < tau; });
}

ColumnSelection select_columns_by_rank(const Eigen::MatrixXd& matrix, double rank_tolerance) {
  if (!(rank_tolerance > 0.0 && rank_tolerance <= 1.0)) throw UsageError("rank tolerance must lie in (0, 1]");
  return select_with_ratio(matrix, rank_tolerance,
                           [rank_tolerance](double r11, double r) { return r >= rank_tolerance * r11; });
}

ConditionNumber condition_number(const Eigen::MatrixXd& matrix, ConditionMode mode) {
  const Eigen::Index n = matrix.rows();
  const Eigen::Index d = matrix.cols();
  if (n < 1 || d < 1) throw UsageError("condition number of an empty matrix");
  if (mode == ConditionMode::automatic) mode = n >= d ? ConditionMode::exact : ConditionMode::fast;

  ConditionNumber out;
  out.mode = mode;
  constexpr double inf = std::numeric_limits<double>::infinity();
  constexpr double eps = std::numeric_limits<double>::epsilon();

  if (mode == ConditionMode::fast) {
    const PivotedQRResult qr = pivoted_qr(matrix);
    if (qr.r_diagonal.empty()) {
      out.raw_ratio = inf;
    } else {
      const double last = static_cast<Eigen::Index>(qr.r_diagonal.size()) < d ? 0.0 : qr.r_diagonal.back();
      out.raw_ratio = last > 0.0 ? qr.r_diagonal.front() / last : inf;
    }
  } else if (n < d) {
    // More columns than rows: the columns are linearly dependent.
    out.raw_ratio = inf;
  } else {
    Eigen::VectorXd sv;
    if (n > d) {
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(matrix);
      const Eigen::MatrixXd r = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
      sv = Eigen::BDCSVD<Eigen::MatrixXd>(r).singularValues();
    } else {
      sv = Eigen::BDCSVD<Eigen::MatrixXd>(matrix).singularValues();
    }
    const double smax = sv.maxCoeff();
    const double smin = sv.minCoeff();
    out.raw_ratio = smin > 0.0 ? smax / smin : inf;
  }
  out.rank_deficient = !(out.raw_ratio * eps < 1.0);
  out.value = out.rank_deficient ? inf : out.raw_ratio;
  return out;
}

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& matrix) {
  check_symmetric(matrix);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
  return solver.eigenvalues();
}

EigenPairs symmetric_eigenpairs(const Eigen::MatrixXd& matrix, Eigen::Index k_smallest) {
  check_symmetric(matrix);
  if (k_smallest < 1 || k_smallest > matrix.rows()) {
    throw UsageError("requested " + std::to_string(k_smallest) + " eigenpairs of a " + std::to_string(matrix.rows()) +
                     "x" + std::to_string(matrix.rows()) + " matrix");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
  EigenPairs out;
  out.values = solver.eigenvalues().head(k_smallest);
  out.vectors = solver.eigenvectors().leftCols(k_smallest);
  // Sign convention: the entry of largest magnitude is positive.
  for (Eigen::Index c = 0; c < k_smallest; ++c) {
    Eigen::Index arg = 0;
    out.vectors.col(c).cwiseAbs().maxCoeff(&arg);
    if (out.vectors(arg, c) < 0.0) out.vectors.col(c) *= -1.0;
  }
  return out;
}

namespace {

struct LloydRun {
  std::vector<int> assign;
  RowMatrix centroids;
  double inertia = 0.0;
  std::vector<double> history;
  int iterations = 0;
};

RowMatrix kmeanspp_seeds(const RowMatrix& x, int k, std::mt19937_64& rng) {
  const Eigen::Index n = x.rows();
  RowMatrix centers(k, x.cols());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  auto first = static_cast<Eigen::Index>(uniform01(rng) * static_cast<double>(n));
  first = std::min(first, n - 1);
  centers.row(0) = x.row(first);
  chosen[static_cast<std::size_t>(first)] = true;

  std::vector<double> d2(static_cast<std::size_t>(n));
  parallel_for(0, static_cast<std::size_t>(n), [&](std::size_t i) {
    d2[i] = (x.row(static_cast<Eigen::Index>(i)) - centers.row(0)).squaredNorm();
  });
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    Eigen::Index pick = -1;
    if (total > 0.0) {
      const double target = uniform01(rng) * total;
      double cumulative = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double v = d2[static_cast<std::size_t>(i)];
        if (v <= 0.0) continue;
        cumulative += v;
        pick = i;
        if (cumulative > target) break;
      }
    } else {
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) {
          pick = i;
          break;
        }
      }
    }
    centers.row(c) = x.row(pick);
    chosen[static_cast<std::size_t>(pick)] = true;
    parallel_for(0, static_cast<std::size_t>(n), [&](std::size_t i) {
      d2[i] = std::min(d2[i], (x.row(static_cast<Eigen::Index>(i)) - centers.row(c)).squaredNorm());
    });
  }
  return centers;
}

RowMatrix cluster_means(const RowMatrix& x, const std::vector<int>& assign, const RowMatrix& previous) {
  RowMatrix sums = RowMatrix::Zero(previous.rows(), x.cols());
  std::vector<std::size_t> counts(static_cast<std::size_t>(previous.rows()), 0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int c = assign[static_cast<std::size_t>(i)];
    sums.row(c) += x.row(i);
    ++counts[static_cast<std::size_t>(c)];
  }
  for (Eigen::Index c = 0; c < sums.rows(); ++c) {
    const std::size_t count = counts[static_cast<std::size_t>(c)];
    if (count > 0) {
      sums.row(c) /= static_cast<double>(count);
    } else {
      sums.row(c) = previous.row(c);
    }
  }
  return sums;
}

void repair_empty_clusters(const RowMatrix& x, std::vector<int>& assign, std::vector<double>& mind, RowMatrix& centroids) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto k = static_cast<std::size_t>(centroids.rows());
  std::vector<std::size_t> counts(k, 0);
  for (int c : assign) ++counts[static_cast<std::size_t>(c)];
  for (std::size_t e = 0; e < k; ++e) {
    if (counts[e] > 0) continue;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mind[a] > mind[b]; });

    bool repaired = false;
    for (std::size_t p : order) {
      const int donor = assign[p];
      std::vector<std::size_t> group;
      for (std::size_t i = 0; i < n; ++i) {
        if (assign[i] == donor && x.row(static_cast<Eigen::Index>(i)) == x.row(static_cast<Eigen::Index>(p))) {
          group.push_back(i);
        }
      }
      if (counts[static_cast<std::size_t>(donor)] <= group.size()) continue;
      for (std::size_t i : group) {
        assign[i] = static_cast<int>(e);
        mind[i] = 0.0;
      }
      counts[static_cast<std::size_t>(donor)] -= group.size();
      counts[e] = group.size();
      centroids.row(static_cast<Eigen::Index>(e)) = x.row(static_cast<Eigen::Index>(p));
      repaired = true;
      break;
    }
    if (!repaired) {
      // Fewer distinct points than clusters: split a duplicate group.
      for (std::size_t p : order) {
        const auto donor = static_cast<std::size_t>(assign[p]);
        if (counts[donor] < 2) continue;
        assign[p] = static_cast<int>(e);
        mind[p] = 0.0;
        --counts[donor];
        counts[e] = 1;
        centroids.row(static_cast<Eigen::Index>(e)) = x.row(static_cast<Eigen::Index>(p));
        break;
      }
    }
  }
}

LloydRun lloyd(const RowMatrix& x, RowMatrix centroids, int max_iters) {
  const auto n = static_cast<std::size_t>(x.rows());
  const Eigen::Index k = centroids.rows();
  LloydRun run;
  std::vector<int> assign(n, 0);
  std::vector<int> previous;
  std::vector<double> mind(n, 0.0);
  for (int it = 0; it < max_iters; ++it) {
    parallel_for(0, n, [&](std::size_t i) {
      const auto xi = x.row(static_cast<Eigen::Index>(i));
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (Eigen::Index c = 0; c < k; ++c) {
        const double dist = (xi - centroids.row(c)).squaredNorm();
        if (dist < best) {
          best = dist;
          arg = static_cast<int>(c);
        }
      }
      assign[i] = arg;
      mind[i] = best;
    });
    repair_empty_clusters(x, assign, mind, centroids);
    double inertia = 0.0;
    for (double v : mind) inertia += v;
    run.history.push_back(inertia);
    run.iterations = it + 1;
    if (assign == previous) break;
    previous = assign;
    centroids = cluster_means(x, assign, centroids);
  }
  run.centroids = cluster_means(x, assign, centroids);
  double inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    inertia += (x.row(static_cast<Eigen::Index>(i)) - run.centroids.row(assign[i])).squaredNorm();
  }
  run.inertia = inertia;
  run.assign = std::move(assign);
  return run;
}

// Single-point moves after Lloyd converges: x leaves cluster a for b when
// n_b/(n_b+1) |x-c_b|^2 < n_a/(n_a-1) |x-c_a|^2, i.e. whenever the exact
// inertia drops. Lloyd fixpoints can still be improved this way; the result
// is again a Lloyd fixpoint.
void refine_single_moves(const RowMatrix& x, LloydRun& run, int max_passes) {
  const auto n = static_cast<std::size_t>(x.rows());
  const Eigen::Index k = run.centroids.rows();
  std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
  for (int c : run.assign) counts[static_cast<std::size_t>(c)] += 1.0;
  for (int pass = 0; pass < max_passes; ++pass) {
    bool moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      const auto xi = x.row(static_cast<Eigen::Index>(i));
      const int a = run.assign[i];
      const double na = counts[static_cast<std::size_t>(a)];
      if (na < 2.0) continue;
      const double leave = na / (na - 1.0) * (xi - run.centroids.row(a)).squaredNorm();
      double best = leave;
      int target = a;
      for (Eigen::Index b = 0; b < k; ++b) {
        if (b == a) continue;
        const double nb = counts[static_cast<std::size_t>(b)];
        const double join = nb / (nb + 1.0) * (xi - run.centroids.row(b)).squaredNorm();
        if (join < best) {
          best = join;
          target = static_cast<int>(b);
        }
      }
      if (target == a || best >= leave * (1.0 - 1e-12)) continue;
      const double nb = counts[static_cast<std::size_t>(target)];
      run.centroids.row(a) = (run.centroids.row(a) * na - xi) / (na - 1.0);
      run.centroids.row(target) = (run.centroids.row(target) * nb + xi) / (nb + 1.0);
      counts[static_cast<std::size_t>(a)] -= 1.0;
      counts[static_cast<std::size_t>(target)] += 1.0;
      run.assign[i] = target;
      moved = true;
    }
    if (!moved) break;
  }
  run.centroids = cluster_means(x, run.assign, run.centroids);
  double inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    inertia += (x.row(static_cast<Eigen::Index>(i)) - run.centroids.row(run.assign[i])).squaredNorm();
  }
  run.inertia = inertia;
}

}  // namespace

ClusterAssignment kmeans(const Eigen::MatrixXd& points, const KMeansOptions& options) {
  const Eigen::Index n = points.rows();
  if (n < 1) throw UsageError("k-means needs at least one point");
  if (options.k < 1 || options.k > n) {
    throw UsageError("k-means needs 1 <= k <= n, got k=" + std::to_string(options.k) + " n=" + std::to_string(n));
  }
  if (options.max_iters < 1 || options.restarts < 1) throw UsageError("k-means needs max_iters >= 1 and restarts >= 1");

  const RowMatrix x = points;
  LloydRun best;
  bool have_best = false;
  for (int r = 0; r < options.restarts; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed & 0xffffffffu), static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    LloydRun run = lloyd(x, kmeanspp_seeds(x, options.k, rng), options.max_iters);
    refine_single_moves(x, run, options.max_iters);
    if (!have_best || run.inertia < best.inertia) {
      best = std::move(run);
      have_best = true;
    }
  }

  ClusterAssignment out;
  out.cluster_of = std::move(best.assign);
  out.k = options.k;
  out.centroids = Eigen::MatrixXd(best.centroids);
  out.inertia = best.inertia;
  out.inertia_history = std::move(best.history);
  out.iterations = best.iterations;
  return out;
}

std::vector<int> connected_components(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  const auto find = [&](std::size_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  for (const auto& [a, b] : edges) {
    const std::size_t ra = find(a);
    const std::size_t rb = find(b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::vector<int> label(n, -1);
  std::vector<int> root_label(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (root_label[r] < 0) root_label[r] = next++;
    label[i] = root_label[r];
  }
  return label;
}

ClusterAssignment agglomerative_threshold(const Eigen::MatrixXd& points, double distance_cutoff) {
  if (!(distance_cutoff >= 0.0)) throw UsageError("distance cutoff must be nonnegative");
  const RowMatrix x = points;
  const auto n = static_cast<std::size_t>(x.rows());
  const double cutoff2 = distance_cutoff * distance_cutoff;
  std::vector<std::vector<std::size_t>> neighbors(n);
  parallel_for(0, n, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).squaredNorm() <= cutoff2) {
        neighbors[i].push_back(j);
      }
    }
  });
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : neighbors[i]) edges.emplace_back(i, j);
  }

  ClusterAssignment out;
  out.cluster_of = connected_components(n, edges);
  out.k = out.cluster_of.empty() ? 0 : *std::max_element(out.cluster_of.begin(), out.cluster_of.end()) + 1;
  RowMatrix centroids = RowMatrix::Zero(out.k, x.cols());
  centroids = cluster_means(x, out.cluster_of, centroids);
  double inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    inertia += (x.row(static_cast<Eigen::Index>(i)) - centroids.row(out.cluster_of[i])).squaredNorm();
  }
  out.centroids = Eigen::MatrixXd(centroids);
  out.inertia = inertia;
  return out;
}

}  // namespace wavesim
