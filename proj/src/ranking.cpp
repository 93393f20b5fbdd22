#include "hsearch/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <spdlog/spdlog.h>

#include "hsearch/error.hpp"

namespace hsearch {

Matrix cluster_topic_dist(const CoClusterResult& result, std::size_t n_clusters,
                          const Matrix& hashtag_topics) {
  if (result.rho.size() != static_cast<std::size_t>(hashtag_topics.rows()))
    throw InvalidConfig("hashtag topic matrix does not match the row mapping");
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(n_clusters), hashtag_topics.cols());
  std::vector<std::size_t> members(n_clusters, 0);
  for (std::size_t h = 0; h < result.rho.size(); ++h) {
    const auto c = result.rho[h];
    out.row(c) += result.hashtag_weights[h] * hashtag_topics.row(static_cast<Eigen::Index>(h));
    ++members[c];
  }
  for (std::size_t c = 0; c < n_clusters; ++c)
    if (members[c] == 0) throw EmptyCluster("cluster " + std::to_string(c) + " has no hashtags");
  return out;
}

SemanticRelevance semantic_relevance(const Matrix& cluster_topics) {
  const Eigen::Index n = cluster_topics.rows();
  if (n < 2) throw InvalidConfig("semantic relevance needs at least 2 clusters");
  Matrix sq(n, n);
  double dist_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    sq(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d2 = (cluster_topics.row(i) - cluster_topics.row(j)).squaredNorm();
      sq(i, j) = sq(j, i) = d2;
      dist_sum += std::sqrt(d2);
    }
  }
  SemanticRelevance out;
  out.sigma = dist_sum / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
  if (!(out.sigma > 0.0)) {
    spdlog::warn("semantic relevance: all clusters coincide (sigma = 0); using kappa = 1");
    out.degenerate = true;
    out.kappa = Matrix::Ones(n, n);
    return out;
  }
  const double denom = 2.0 * out.sigma * out.sigma;
  out.kappa = (-sq.array() / denom).exp().matrix();
  out.kappa.diagonal().setOnes();
  return out;
}

Matrix normalized_affinity(const Matrix& kappa) {
  if (kappa.rows() != kappa.cols()) throw InvalidConfig("kappa must be square");
  if ((kappa.array() < 0.0).any()) throw InvalidConfig("kappa entries must be non-negative");
  const Eigen::VectorXd d = kappa.rowwise().sum();
  Eigen::VectorXd inv_sqrt(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) inv_sqrt[i] = d[i] > 0 ? 1.0 / std::sqrt(d[i]) : 0.0;
  return inv_sqrt.asDiagonal() * kappa * inv_sqrt.asDiagonal();
}

RankResult rank_clusters(const Matrix& kappa, const Eigen::VectorXd& U, const RankOptions& opt) {
  if (!(opt.psi > 0.0)) throw InvalidConfig("psi must be positive");
  if (U.size() != kappa.rows()) throw InvalidConfig("U does not match kappa");
  const Matrix S = normalized_affinity(kappa);
  const Eigen::VectorXd restart = opt.psi * U;
  const double scale = 1.0 / (1.0 + opt.psi);
  RankResult res;
  Eigen::VectorXd eta = U;
  for (std::size_t it = 1; it <= opt.max_iter; ++it) {
    // η is a row vector; S is symmetric so η S = S η.
    Eigen::VectorXd next = scale * (S.transpose() * eta + restart);
    const double delta = (next - eta).lpNorm<1>();
    eta.swap(next);
    if (delta < opt.tol) {
      res.importance = std::move(eta);
      res.iterations = it;
      return res;
    }
  }
  throw NonConvergence("cluster ranking did not converge in " + std::to_string(opt.max_iter) +
                       " iterations");
}

Eigen::VectorXd rank_clusters_closed_form(const Matrix& kappa, const Eigen::VectorXd& U,
                                          double psi) {
  if (!(psi > 0.0)) throw InvalidConfig("psi must be positive");
  const Matrix S = normalized_affinity(kappa);
  const Eigen::Index n = S.rows();
  const Matrix A = (1.0 + psi) * Matrix::Identity(n, n) - S;
  // row-vector system η A = ψU  <=>  Aᵀ ηᵀ = ψUᵀ
  return A.transpose().partialPivLu().solve(psi * U);
}

Eigen::VectorXd cluster_word_distribution(const Eigen::VectorXd& cluster_topics,
                                          const Matrix& topic_words) {
  if (cluster_topics.size() != topic_words.rows())
    throw InvalidConfig("cluster topic vector does not match topic-word matrix");
  return topic_words.transpose() * cluster_topics;
}

std::vector<WordScore> describe_cluster(const Eigen::VectorXd& cluster_topics,
                                        const Matrix& topic_words, const Vocabulary& vocab,
                                        std::size_t k) {
  const Eigen::VectorXd p = cluster_word_distribution(cluster_topics, topic_words);
  if (static_cast<std::size_t>(p.size()) != vocab.size())
    throw InvalidConfig("topic-word matrix does not match the vocabulary");
  std::vector<std::size_t> idx(vocab.size());
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t n = std::min(k, idx.size());
  // vocabulary is sorted, so index order is lexicographic order
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
                      return p[ia] > p[ib] || (p[ia] == p[ib] && a < b);
                    });
  std::vector<WordScore> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back({vocab.word(idx[i]), p[static_cast<Eigen::Index>(idx[i])]});
  return out;
}

Eigen::VectorXd appearance_counts(const CoClusterResult& result, std::size_t n_clusters,
                                  std::span<const HashtagProfile> profiles,
                                  const QueryCollection& qc) {
  if (profiles.size() != result.rho.size())
    throw InvalidConfig("profiles do not match the row mapping");
  Eigen::VectorXd U = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_clusters));
  for (std::size_t h = 0; h < profiles.size(); ++h) {
    for (const auto& id : profiles[h].item_ids) {
      const Item* it = qc.find(id);
      if (it && !it->extended) U[result.rho[h]] += 1.0;
    }
  }
  return U;
}

Hierarchy assemble_hierarchy(const CoClusterResult& result, std::span<const HashtagProfile> profiles,
                             const QueryCollection& qc, const Eigen::VectorXd& importance,
                             const Eigen::VectorXd& appearances,
                             const std::vector<std::vector<WordScore>>& descriptions) {
  const auto n_clusters = static_cast<std::size_t>(importance.size());
  if (profiles.size() != result.rho.size())
    throw InvalidConfig("profiles do not match the row mapping");

  std::map<std::string, const Item*> by_id;
  for (const Item* it : qc.all_items()) by_id.emplace(it->id, it);

  std::vector<HierarchyCluster> clusters(n_clusters);
  for (std::size_t c = 0; c < n_clusters; ++c) {
    clusters[c].cluster = c;
    clusters[c].importance = importance[static_cast<Eigen::Index>(c)];
    if (appearances.size() == importance.size())
      clusters[c].appearances = appearances[static_cast<Eigen::Index>(c)];
    if (c < descriptions.size()) clusters[c].description = descriptions[c];
  }
  for (std::size_t h = 0; h < profiles.size(); ++h) {
    HierarchyHashtag tag;
    tag.tag = profiles[h].tag;
    tag.source = profiles[h].source;
    tag.weight = result.hashtag_weights[h];
    for (const auto& id : profiles[h].item_ids) {
      auto f = by_id.find(id);
      if (f == by_id.end()) throw UnknownItem("profile item '" + id + "' not in the collection");
      const Item& it = *f->second;
      tag.items.push_back({it.id, it.timestamp, it.text, it.comments, it.endorsements});
    }
    std::sort(tag.items.begin(), tag.items.end(), [](const HierarchyItem& a, const HierarchyItem& b) {
      return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.id < b.id;
    });
    clusters[result.rho[h]].hashtags.push_back(std::move(tag));
  }
  for (auto& c : clusters)
    std::sort(c.hashtags.begin(), c.hashtags.end(),
              [](const HierarchyHashtag& a, const HierarchyHashtag& b) {
                if (a.weight != b.weight) return a.weight > b.weight;
                if (a.tag != b.tag) return a.tag < b.tag;
                return a.source < b.source;
              });
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const HierarchyCluster& a, const HierarchyCluster& b) {
                     return a.importance > b.importance;
                   });
  for (std::size_t r = 0; r < clusters.size(); ++r) clusters[r].rank = r + 1;
  return Hierarchy{qc.query(), std::move(clusters)};
}

}  // namespace hsearch
