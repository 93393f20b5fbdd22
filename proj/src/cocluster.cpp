#include "hsearch/cocluster.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>

#include "hsearch/error.hpp"
#include "hsearch/random.hpp"

namespace hsearch {

void CoClusterConfig::validate(std::size_t n_rows, std::size_t n_cols) const {
  if (row_clusters < 1 || row_clusters > n_rows)
    throw InfeasibleConfig("row cluster count " + std::to_string(row_clusters) +
                           " must lie in [1, " + std::to_string(n_rows) + "]");
  if (col_clusters < 1 || col_clusters > n_cols)
    throw InfeasibleConfig("column cluster count " + std::to_string(col_clusters) +
                           " must lie in [1, " + std::to_string(n_cols) + "]");
  if (lambda_topic < 0 || lambda_cooccur < 0)
    throw InfeasibleConfig("regularizer weights must be non-negative");
}

namespace {

// Mean row per cluster; clusters without members get the global mean row.
Matrix cluster_centroids(const Matrix& X, const Mapping& map, std::size_t n_clusters) {
  Matrix cent = Matrix::Zero(static_cast<Eigen::Index>(n_clusters), X.cols());
  std::vector<double> count(n_clusters, 0.0);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    cent.row(map[static_cast<std::size_t>(i)]) += X.row(i);
    count[map[static_cast<std::size_t>(i)]] += 1.0;
  }
  Eigen::RowVectorXd global =
      X.rows() ? Eigen::RowVectorXd(X.colwise().mean()) : Eigen::RowVectorXd::Zero(X.cols());
  for (std::size_t c = 0; c < n_clusters; ++c) {
    if (count[c] > 0)
      cent.row(static_cast<Eigen::Index>(c)) /= count[c];
    else
      cent.row(static_cast<Eigen::Index>(c)) = global;
  }
  return cent;
}

Matrix block_means(const Matrix& H, const Mapping& rho, std::size_t n_row_clusters,
                   const Mapping& gamma, std::size_t n_col_clusters) {
  Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(n_row_clusters),
                            static_cast<Eigen::Index>(n_col_clusters));
  Matrix count = sum;
  for (Eigen::Index i = 0; i < H.rows(); ++i)
    for (Eigen::Index j = 0; j < H.cols(); ++j) {
      sum(rho[static_cast<std::size_t>(i)], gamma[static_cast<std::size_t>(j)]) += H(i, j);
      count(rho[static_cast<std::size_t>(i)], gamma[static_cast<std::size_t>(j)]) += 1.0;
    }
  const double global = H.size() ? H.mean() : 0.0;
  for (Eigen::Index r = 0; r < sum.rows(); ++r)
    for (Eigen::Index c = 0; c < sum.cols(); ++c)
      sum(r, c) = count(r, c) > 0 ? sum(r, c) / count(r, c) : global;
  return sum;
}

struct TermWeights {
  double h = 0, t = 0, o = 0;
};

TermWeights term_weights(const Matrix& H, const Matrix& T, const Matrix& O,
                         const CoClusterConfig& cfg) {
  TermWeights w;
  if (H.size()) w.h = 1.0 / static_cast<double>(H.size());
  if (T.size() && cfg.lambda_topic > 0) w.t = cfg.lambda_topic / static_cast<double>(T.size());
  if (O.size() && cfg.lambda_cooccur > 0) w.o = cfg.lambda_cooccur / static_cast<double>(O.size());
  return w;
}

// Squared-error cost of column t under candidate column cluster c.
double column_cost(const Matrix& H, const Matrix& T, const Mapping& rho, const Matrix& block,
                   const Matrix& tcent, const TermWeights& w, Eigen::Index t, Eigen::Index c) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < H.rows(); ++i) {
    const double d = H(i, t) - block(rho[static_cast<std::size_t>(i)], c);
    h += d * d;
  }
  double cost = w.h * h;
  if (w.t > 0) cost += w.t * (T.row(t) - tcent.row(c)).squaredNorm();
  return cost;
}

// Cost of row h under candidate row cluster r with every other row held at
// `rho`. The co-occurrence part covers row h and column h of O against the
// block prototypes `oblock`.
double row_cost(const Matrix& H, const Matrix& O, const Mapping& rho, const Mapping& gamma,
                const Matrix& block, const Matrix& oblock, const TermWeights& w, Eigen::Index h,
                Eigen::Index r) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < H.cols(); ++j) {
    const double d = H(h, j) - block(r, gamma[static_cast<std::size_t>(j)]);
    s += d * d;
  }
  double cost = w.h * s;
  if (w.o > 0) {
    double o = 0.0;
    for (Eigen::Index j = 0; j < O.cols(); ++j) {
      if (j == h) continue;
      const auto cj = static_cast<Eigen::Index>(rho[static_cast<std::size_t>(j)]);
      const double dr = O(h, j) - oblock(r, cj);
      const double dc = O(j, h) - oblock(cj, r);
      o += dr * dr + dc * dc;
    }
    const double ds = O(h, h) - oblock(r, r);
    cost += w.o * (o + ds * ds);
  }
  return cost;
}

template <typename CostFn>
Mapping reassign(const Mapping& current, std::size_t n_clusters, CostFn cost) {
  Mapping next = current;
  for (std::size_t e = 0; e < current.size(); ++e) {
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_c = current[e];
    double stay = best;
    for (std::uint32_t c = 0; c < n_clusters; ++c) {
      const double v = cost(e, c);
      if (c == current[e]) stay = v;
      if (v < best) {
        best = v;
        best_c = c;
      }
    }
    // lowest-index argmin; an element only moves on strict improvement
    if (best < stay) next[e] = best_c;
  }
  return next;
}

// Moves the costliest member of a cluster with ≥ 2 members into each empty
// cluster; `cost(e)` is evaluated under the current statistics.
template <typename CostFn, typename Refresh>
void repair_empty(Mapping& map, std::size_t n_clusters, CostFn cost, Refresh refresh) {
  for (std::uint32_t target = 0; target < n_clusters; ++target) {
    std::vector<std::size_t> sizes(n_clusters, 0);
    for (auto c : map) ++sizes[c];
    if (sizes[target] > 0) continue;
    refresh(map);
    std::size_t pick = map.size();
    double worst = -1.0;
    for (std::size_t e = 0; e < map.size(); ++e) {
      if (sizes[map[e]] < 2) continue;
      const double v = cost(e, map[e]);
      if (v > worst) {
        worst = v;
        pick = e;
      }
    }
    if (pick < map.size()) map[pick] = target;
  }
}

Mapping random_mapping(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  Mapping map(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    map[order[i]] = static_cast<std::uint32_t>(i < k ? i : rng.below(k));
  return map;
}

std::vector<double> cluster_weights(const Mapping& rho, std::size_t n_clusters,
                                    std::span<const double> row_mass) {
  std::vector<double> mass(rho.size(), 1.0);
  if (!row_mass.empty()) std::copy(row_mass.begin(), row_mass.end(), mass.begin());
  std::vector<double> total(n_clusters, 0.0);
  for (std::size_t h = 0; h < rho.size(); ++h) total[rho[h]] += mass[h];
  std::vector<std::size_t> members(n_clusters, 0);
  for (auto r : rho) ++members[r];
  std::vector<double> w(rho.size());
  for (std::size_t h = 0; h < rho.size(); ++h)
    w[h] = total[rho[h]] > 0 ? mass[h] / total[rho[h]] : 1.0 / static_cast<double>(members[rho[h]]);
  return w;
}

void check_shapes(const Matrix& H, const Matrix& T, const Matrix& O) {
  if (T.size() && T.rows() != H.cols())
    throw InfeasibleConfig("topic-word matrix rows must match hashtag-topic columns");
  if (O.size() && (O.rows() != H.rows() || O.cols() != H.rows()))
    throw InfeasibleConfig("co-occurrence matrix must be N_h x N_h");
}

}  // namespace

Matrix mbi_approximation(const Matrix& H, const Mapping& rho, std::size_t n_row_clusters,
                         const Mapping& gamma, std::size_t n_col_clusters) {
  const Matrix block = block_means(H, rho, n_row_clusters, gamma, n_col_clusters);
  Matrix approx(H.rows(), H.cols());
  for (Eigen::Index i = 0; i < H.rows(); ++i)
    for (Eigen::Index j = 0; j < H.cols(); ++j)
      approx(i, j) = block(rho[static_cast<std::size_t>(i)], gamma[static_cast<std::size_t>(j)]);
  return approx;
}

Matrix row_cluster_means(const Matrix& X, const Mapping& map, std::size_t n_clusters) {
  Matrix cent = cluster_centroids(X, map, n_clusters);
  Matrix out(X.rows(), X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out.row(i) = cent.row(map[static_cast<std::size_t>(i)]);
  return out;
}

double objective(const Matrix& H, const Matrix& T, const Matrix& O, const Mapping& rho,
                 const Mapping& gamma, const CoClusterConfig& cfg) {
  const TermWeights w = term_weights(H, T, O, cfg);
  double value = 0.0;
  if (w.h > 0)
    value += w.h * (H - mbi_approximation(H, rho, cfg.row_clusters, gamma, cfg.col_clusters))
                       .squaredNorm();
  if (w.t > 0) value += w.t * (T - row_cluster_means(T, gamma, cfg.col_clusters)).squaredNorm();
  if (w.o > 0)
    value += w.o * (O - mbi_approximation(O, rho, cfg.row_clusters, rho, cfg.row_clusters))
                       .squaredNorm();
  return value;
}

Mapping reassign_columns(const Matrix& H, const Matrix& T, const Mapping& rho,
                         const Mapping& gamma, const CoClusterConfig& cfg) {
  const TermWeights w = term_weights(H, T, Matrix(), cfg);
  const Matrix block = block_means(H, rho, cfg.row_clusters, gamma, cfg.col_clusters);
  const Matrix tcent = w.t > 0 ? cluster_centroids(T, gamma, cfg.col_clusters) : Matrix();
  return reassign(gamma, cfg.col_clusters, [&](std::size_t t, std::uint32_t c) {
    return column_cost(H, T, rho, block, tcent, w, static_cast<Eigen::Index>(t), c);
  });
}

Mapping reassign_rows(const Matrix& H, const Matrix& O, const Mapping& rho, const Mapping& gamma,
                      const CoClusterConfig& cfg) {
  const TermWeights w = term_weights(H, Matrix(), O, cfg);
  const Matrix block = block_means(H, rho, cfg.row_clusters, gamma, cfg.col_clusters);
  const Matrix oblock =
      w.o > 0 ? block_means(O, rho, cfg.row_clusters, rho, cfg.row_clusters) : Matrix();
  // Rows move one at a time so the co-occurrence cost of later rows sees
  // earlier moves; prototypes stay fixed for the whole sweep.
  Mapping next = rho;
  for (std::size_t h = 0; h < rho.size(); ++h) {
    const auto hi = static_cast<Eigen::Index>(h);
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_r = next[h];
    double stay = best;
    for (std::uint32_t r = 0; r < cfg.row_clusters; ++r) {
      const double v = row_cost(H, O, next, gamma, block, oblock, w, hi, r);
      if (r == next[h]) stay = v;
      if (v < best) {
        best = v;
        best_r = r;
      }
    }
    if (best < stay) next[h] = best_r;
  }
  return next;
}

CoClusterResult ccbr_fit_from(const Matrix& H, const Matrix& T, const Matrix& O,
                              const CoClusterConfig& cfg, Mapping rho, Mapping gamma,
                              std::span<const double> row_mass) {
  const auto n_rows = static_cast<std::size_t>(H.rows());
  const auto n_cols = static_cast<std::size_t>(H.cols());
  cfg.validate(n_rows, n_cols);
  check_shapes(H, T, O);
  if (rho.size() != n_rows || gamma.size() != n_cols)
    throw InfeasibleConfig("initial mappings do not match matrix dimensions");
  if (!row_mass.empty() && row_mass.size() != n_rows)
    throw InfeasibleConfig("row mass vector does not match the number of rows");

  const TermWeights w = term_weights(H, T, O, cfg);
  CoClusterResult res;
  res.seed = cfg.seed;
  double obj = objective(H, T, O, rho, gamma, cfg);
  res.objective_trace.push_back(obj);

  for (std::size_t iter = 0; iter < cfg.max_iter; ++iter) {
    // Step B: topic columns.
    Mapping g = reassign_columns(H, T, rho, gamma, cfg);
    {
      Matrix block, tcent;
      repair_empty(
          g, cfg.col_clusters,
          [&](std::size_t t, std::uint32_t c) {
            return column_cost(H, T, rho, block, tcent, w, static_cast<Eigen::Index>(t), c);
          },
          [&](const Mapping& cur) {
            block = block_means(H, rho, cfg.row_clusters, cur, cfg.col_clusters);
            if (w.t > 0) tcent = cluster_centroids(T, cur, cfg.col_clusters);
          });
    }
    // Step C: hashtag rows, against statistics of the updated columns.
    Mapping r = reassign_rows(H, O, rho, g, cfg);
    {
      Matrix block, oblock;
      Mapping current;
      repair_empty(
          r, cfg.row_clusters,
          [&](std::size_t h, std::uint32_t c) {
            return row_cost(H, O, current, g, block, oblock, w, static_cast<Eigen::Index>(h), c);
          },
          [&](const Mapping& cur) {
            current = cur;
            block = block_means(H, cur, cfg.row_clusters, g, cfg.col_clusters);
            if (w.o > 0) oblock = block_means(O, cur, cfg.row_clusters, cur, cfg.row_clusters);
          });
    }

    if (g == gamma && r == rho) break;
    const double next = objective(H, T, O, r, g, cfg);
    // Exact arithmetic cannot increase the objective here; rounding can.
    if (next > obj) break;
    gamma = std::move(g);
    rho = std::move(r);
    res.objective_trace.push_back(next);
    ++res.iterations;
    const double gain = obj - next;
    obj = next;
    if (gain < cfg.tol) break;
  }

  res.hashtag_weights = cluster_weights(rho, cfg.row_clusters, row_mass);
  res.rho = std::move(rho);
  res.gamma = std::move(gamma);
  return res;
}

CoClusterResult ccbr_fit(const Matrix& H, const Matrix& T, const Matrix& O,
                         const CoClusterConfig& cfg, std::span<const double> row_mass) {
  cfg.validate(static_cast<std::size_t>(H.rows()), static_cast<std::size_t>(H.cols()));
  Rng rng(cfg.seed);
  Mapping gamma = random_mapping(static_cast<std::size_t>(H.cols()), cfg.col_clusters, rng);
  Mapping rho = random_mapping(static_cast<std::size_t>(H.rows()), cfg.row_clusters, rng);
  return ccbr_fit_from(H, T, O, cfg, std::move(rho), std::move(gamma), row_mass);
}

CoClusterResult choose_restart(const Matrix& H, const Matrix& T, const Matrix& O,
                               const CoClusterConfig& cfg, std::size_t n_restarts,
                               std::span<const double> row_mass) {
  if (n_restarts < 1) throw InfeasibleConfig("need at least one restart");
  std::optional<CoClusterResult> best;
  for (std::size_t k = 0; k < n_restarts; ++k) {
    CoClusterConfig run = cfg;
    run.seed = cfg.seed + k;
    CoClusterResult r = ccbr_fit(H, T, O, run, row_mass);
    if (!best || r.objective() < best->objective()) best = std::move(r);
  }
  return std::move(*best);
}

void dump_cocluster(const CoClusterResult& r, std::ostream& out) {
  out << "seed " << r.seed << "\niterations " << r.iterations << "\nrho";
  for (auto c : r.rho) out << ' ' << c;
  out << "\ngamma";
  for (auto c : r.gamma) out << ' ' << c;
  out << "\nobjective";
  for (double v : r.objective_trace) out << ' ' << v;
  out << '\n';
}

}  // namespace hsearch
