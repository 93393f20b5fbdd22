#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hsearch/corpus.hpp"

namespace hsearch {

// Fixed-depth (root + leaf) nested-CRP topic model settings.
struct HldaConfig {
  double alpha = 10.0;  // Dirichlet concentration over the two levels of a path
  double gamma = 1.0;   // nCRP concentration: weight of opening a new leaf
  double eta = 0.1;     // topic-word smoothing
  std::size_t iterations = 500;
  std::uint64_t seed = 1;

  void validate() const;  // throws InvalidConfig
};

struct DocTopics {
  double root = 0.0;
  double leaf = 0.0;
  std::uint32_t leaf_index = 0;
};

struct TopicModel {
  Source source = Source::Twitter;
  std::size_t vocab_size = 0;
  std::vector<double> root_topic;               // |vocab|
  std::vector<std::vector<double>> leaf_topics;  // K x |vocab|
  // One entry per input document; empty documents are skipped (nullopt).
  std::vector<std::optional<DocTopics>> doc_topics;
  std::vector<std::string> doc_ids;  // parallel to doc_topics when known
  std::vector<double> log_likelihood_trace;  // joint log p(w, z, c) per sweep
  std::size_t skipped_documents = 0;

  std::size_t num_leaves() const { return leaf_topics.size(); }
  // -1 when the document was skipped.
  int leaf_assignment(std::size_t doc) const;
  std::optional<std::size_t> doc_index(const std::string& id) const;
};

using Document = std::vector<std::uint32_t>;

// Collapsed Gibbs sampler over leaf paths and per-token levels. Throws
// TooFewDocuments when fewer than two non-empty documents are given.
TopicModel fit_hlda(const std::vector<Document>& docs, std::size_t vocab_size,
                     const HldaConfig& cfg);

// Convenience for one source: encodes each item's text against `vocab` and
// records item ids so profiles can be resolved.
TopicModel fit_source_model(const QueryCollection& qc, Source source, const Vocabulary& vocab,
                            const TokenizerConfig& tok, const HldaConfig& cfg);

// Leaf-topic distribution of a hashtag, aggregated over its items: each item
// puts its non-root mass on the leaf of its path. Items whose documents were
// skipped contribute nothing. Throws UnknownItem for ids the model never saw
// and EmptyProfile when none of the items was modeled.
std::vector<double> hashtag_topic_distribution(const TopicModel& model,
                                               const HashtagProfile& profile);

// Same, over explicit per-document leaf vectors (the aggregation step alone).
std::vector<double> aggregate_leaf_distributions(const std::vector<std::vector<double>>& per_doc);

// Human-readable dump: root and leaf topics with their top-n words.
void dump_topics(const TopicModel& model, const Vocabulary& vocab, std::size_t top_n,
                 std::ostream& out);

}  // namespace hsearch
