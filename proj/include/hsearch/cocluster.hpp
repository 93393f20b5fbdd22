#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hsearch {

using Matrix = Eigen::MatrixXd;
// Cluster index per row (or column), 0-based.
using Mapping = std::vector<std::uint32_t>;

// Co-clustering of the hashtag-topic matrix H (N_h x N_t) under squared
// Euclidean divergence with block-average (C2) approximation, uniform measure.
// Two regularizers: one-sided clustering of the topic-word matrix T
// (N_t x |W|) by the column mapping, and block-average clustering of the
// co-occurrence matrix O (N_h x N_h) by the row mapping on both sides.
struct CoClusterConfig {
  std::size_t row_clusters = 2;   // L_row, required in practice
  std::size_t col_clusters = 20;  // L_col
  double lambda_topic = 1.0;      // weight of the T term
  double lambda_cooccur = 1.0;    // weight of the O term
  std::size_t max_iter = 100;
  double tol = 0.0;  // stop when an iteration improves the objective by less
  std::uint64_t seed = 1;

  // Throws InfeasibleConfig.
  void validate(std::size_t n_rows, std::size_t n_cols) const;
};

struct CoClusterResult {
  Mapping rho;    // hashtag -> row cluster
  Mapping gamma;  // topic -> column cluster
  std::vector<double> objective_trace;  // initial value, then one per iteration
  std::vector<double> hashtag_weights;  // p(h | C_rho(h)), sums to 1 within a cluster
  std::size_t iterations = 0;
  std::uint64_t seed = 0;

  double objective() const { return objective_trace.back(); }
};

// Block-average approximation: each entry becomes the mean of its
// (row cluster, column cluster) block. Empty blocks take the global mean.
Matrix mbi_approximation(const Matrix& H, const Mapping& rho, std::size_t n_row_clusters,
                         const Mapping& gamma, std::size_t n_col_clusters);

// Rows of X replaced by the mean row of their cluster.
Matrix row_cluster_means(const Matrix& X, const Mapping& map, std::size_t n_clusters);

//   ‖H − Ĥ‖²/(N_h N_t) + λ_T ‖T − T̂‖²/(N_t |W|) + λ_O ‖O − Ô‖²/N_h²
// with T̂ = row_cluster_means(T, gamma) and Ô = mbi_approximation(O, rho, rho).
// A term whose matrix has no entries contributes 0.
double objective(const Matrix& H, const Matrix& T, const Matrix& O, const Mapping& rho,
                 const Mapping& gamma, const CoClusterConfig& cfg);

// Alternating exact coordinate descent (CCBR). `row_mass` gives the weight
// used for p(h|C) (annotated-item counts); empty means uniform.
CoClusterResult ccbr_fit(const Matrix& H, const Matrix& T, const Matrix& O,
                         const CoClusterConfig& cfg, std::span<const double> row_mass = {});

// Starts from the given mappings instead of a random draw.
CoClusterResult ccbr_fit_from(const Matrix& H, const Matrix& T, const Matrix& O,
                              const CoClusterConfig& cfg, Mapping rho, Mapping gamma,
                              std::span<const double> row_mass = {});

// Runs seeds cfg.seed .. cfg.seed + n_restarts - 1 and keeps the lowest
// objective; ties go to the lower seed.
CoClusterResult choose_restart(const Matrix& H, const Matrix& T, const Matrix& O,
                               const CoClusterConfig& cfg, std::size_t n_restarts,
                               std::span<const double> row_mass = {});

// Single coordinate steps against statistics of the current mappings.
// Columns move simultaneously; rows move one at a time in index order.
// Exposed for testing; they do not repair empty clusters.
Mapping reassign_columns(const Matrix& H, const Matrix& T, const Mapping& rho,
                         const Mapping& gamma, const CoClusterConfig& cfg);
Mapping reassign_rows(const Matrix& H, const Matrix& O, const Mapping& rho, const Mapping& gamma,
                      const CoClusterConfig& cfg);

void dump_cocluster(const CoClusterResult& r, std::ostream& out);

}  // namespace hsearch
