#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hsearch/cocluster.hpp"
#include "hsearch/corpus.hpp"

namespace hsearch {

// p(z | C_l) = Σ_{h ∈ C_l} p(h | C_l) p(z | h). Rows of `hashtag_topics`
// are hashtag distributions. Throws EmptyCluster when a cluster has no member.
Matrix cluster_topic_dist(const CoClusterResult& result, std::size_t n_clusters,
                          const Matrix& hashtag_topics);

struct SemanticRelevance {
  Matrix kappa;
  double sigma = 0.0;
  bool degenerate = false;  // σ = 0: every κ set to 1
};

// κ_ij = exp(−‖p_i − p_j‖² / 2σ²), σ the mean pairwise Euclidean distance.
SemanticRelevance semantic_relevance(const Matrix& cluster_topics);

struct RankOptions {
  double psi = 0.5;
  double tol = 1e-12;
  std::size_t max_iter = 100000;
};

struct RankResult {
  Eigen::VectorXd importance;
  std::size_t iterations = 0;
};

// Normalized propagation matrix S = D^{-1/2} κ D^{-1/2}.
Matrix normalized_affinity(const Matrix& kappa);

// Iterates η ← (η S + ψU)/(1 + ψ) from η⁰ = U until the L1 change < tol.
RankResult rank_clusters(const Matrix& kappa, const Eigen::VectorXd& U, const RankOptions& opt);
// η* = ψ U ((1 + ψ) I − S)^{-1}.
Eigen::VectorXd rank_clusters_closed_form(const Matrix& kappa, const Eigen::VectorXd& U,
                                          double psi);

struct WordScore {
  std::string word;
  double score = 0.0;
  bool operator==(const WordScore&) const = default;
};

// p(w | C) = Σ_t p(z_t | C) p(w | z_t); top k, ties in lexicographic order.
std::vector<WordScore> describe_cluster(const Eigen::VectorXd& cluster_topics,
                                        const Matrix& topic_words, const Vocabulary& vocab,
                                        std::size_t k);
Eigen::VectorXd cluster_word_distribution(const Eigen::VectorXd& cluster_topics,
                                          const Matrix& topic_words);

// Times hashtags of each cluster annotate a non-extended item.
Eigen::VectorXd appearance_counts(const CoClusterResult& result, std::size_t n_clusters,
                                  std::span<const HashtagProfile> profiles,
                                  const QueryCollection& qc);

struct HierarchyItem {
  std::string id;
  std::int64_t timestamp = 0;
  std::string text;
  std::int64_t comments = 0;
  std::int64_t endorsements = 0;
};

struct HierarchyHashtag {
  std::string tag;
  Source source = Source::Twitter;
  double weight = 0.0;
  std::vector<HierarchyItem> items;  // timestamp ascending, then id
};

struct HierarchyCluster {
  std::size_t cluster = 0;  // row cluster index in the co-clustering
  std::size_t rank = 0;     // 1-based
  double importance = 0.0;
  double appearances = 0.0;
  std::vector<WordScore> description;
  std::vector<HierarchyHashtag> hashtags;  // weight descending, then tag
};

struct Hierarchy {
  std::string query;
  std::vector<HierarchyCluster> clusters;  // importance descending
};

// Orders clusters by importance (ties: lower cluster index first), hashtags by
// weight (ties: tag, then source) and items chronologically (ties: id).
Hierarchy assemble_hierarchy(const CoClusterResult& result, std::span<const HashtagProfile> profiles,
                             const QueryCollection& qc, const Eigen::VectorXd& importance,
                             const Eigen::VectorXd& appearances,
                             const std::vector<std::vector<WordScore>>& descriptions);

}  // namespace hsearch
