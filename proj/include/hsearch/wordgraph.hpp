#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "hsearch/corpus.hpp"
#include "hsearch/topics.hpp"

namespace hsearch {

// Symmetric word-word similarity over a vocabulary, values in [0, 1].
// Self-similarity is always 1 and is not stored.
class SimilarityTable {
 public:
  explicit SimilarityTable(std::size_t vocab_size = 0) : n_(vocab_size) {}

  // Stores max(existing, sim) in both directions. Diagonal entries are ignored.
  void set(std::uint32_t i, std::uint32_t j, double sim);
  double get(std::uint32_t i, std::uint32_t j) const;

  std::size_t vocab_size() const { return n_; }
  // Off-diagonal pairs with i < j.
  const std::map<std::pair<std::uint32_t, std::uint32_t>, double>& pairs() const { return pairs_; }

 private:
  std::size_t n_;
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> pairs_;
};

// TSV `word1 \t word2 \t sim`. Lines naming words outside `vocab` are ignored;
// blank lines and lines starting with '#' are skipped. Throws FileNotFound,
// or ParseError (with line number) on malformed lines and out-of-range values.
SimilarityTable load_similarity(const std::filesystem::path& path, const Vocabulary& vocab);
SimilarityTable parse_similarity(std::istream& in, const Vocabulary& vocab);

struct TransitionMatrix {
  Eigen::SparseMatrix<double, Eigen::RowMajor> R;
  std::vector<bool> isolated;  // rows with no surviving similarity (all zero)

  Eigen::Index size() const { return R.rows(); }
};

// R_ij = π_ij / Σ_k π_ik over pairs with π ≥ threshold (self-loops included).
TransitionMatrix build_transition(const SimilarityTable& table, double threshold);

enum class WalkMode { Iterative, ClosedForm };

struct WalkOptions {
  double alpha = 0.5;
  WalkMode mode = WalkMode::Iterative;
  double tol = 1e-12;
  std::size_t max_iter = 10000;
};

struct WalkResult {
  Eigen::VectorXd scores;
  std::size_t iterations = 0;  // 0 for closed form
};

// Fixed point of s = α s R + (1 − α) t, i.e. s = (1 − α) t (I − αR)^{-1}.
// Iterative mode starts from t and stops when ‖s_{l+1} − s_l‖₁ < tol
// (NonConvergence after max_iter). Closed form uses a sparse LU solve.
WalkResult random_walk(const TransitionMatrix& R, const Eigen::VectorXd& t,
                       const WalkOptions& opt);

// Solves many right-hand sides against one factorization of (I − αR)^T.
class ClosedFormWalker {
 public:
  ClosedFormWalker(const TransitionMatrix& R, double alpha);
  Eigen::VectorXd solve(const Eigen::VectorXd& t) const;

 private:
  double alpha_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

struct UnifiedTopic {
  Source source = Source::Twitter;
  std::size_t leaf = 0;
  Eigen::VectorXd words;  // probability vector over the unified vocabulary
};

struct UnifiedTopicSpace {
  std::vector<UnifiedTopic> topics;
  std::size_t size() const { return topics.size(); }
  // Rows are topics, columns unified words.
  Eigen::MatrixXd as_matrix() const;
};

// One source's fitted model together with the vocabulary it was fitted over.
struct SourceTopics {
  const TopicModel* model = nullptr;
  const Vocabulary* vocab = nullptr;
};

// Embeds every leaf topic of every model into `vocab_all`, propagates it over
// the word graph and renormalizes. Topics are listed model by model, leaf by
// leaf.
UnifiedTopicSpace unify_topics(std::span<const SourceTopics> models, const Vocabulary& vocab_all,
                               const TransitionMatrix& R, const WalkOptions& opt);

void dump_unified_topics(const UnifiedTopicSpace& space, const Vocabulary& vocab_all,
                         std::size_t top_n, std::ostream& out);

}  // namespace hsearch
