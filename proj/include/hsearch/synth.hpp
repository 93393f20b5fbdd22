#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "hsearch/cocluster.hpp"
#include "hsearch/corpus.hpp"

namespace hsearch {

// Planted-subtopic corpus generator. Every subtopic owns a disjoint block of
// words; each item draws its words from its subtopic's block, or uniformly
// from all blocks with probability `noise`.
struct PlantedSpec {
  std::size_t subtopics = 3;
  std::size_t tags_per_subtopic = 2;  // per source
  std::size_t items_per_tag = 10;
  // Subtopic s gets items_per_tag + s * items_per_tag_step items per tag
  // (may be negative; clamped at 1).
  long items_per_tag_step = 0;
  std::size_t words_per_subtopic = 30;
  std::size_t words_per_item = 12;
  double noise = 0.0;
  // Probability that an item also carries a second tag of its subtopic/source.
  double cooccur_rate = 0.0;
  // Probability that an item is marked as an extended (hashtag-query) result.
  double extended_rate = 0.0;
  std::uint64_t seed = 1;

  void validate() const;  // throws InvalidConfig
};

struct PlantedCorpus {
  QueryCollection collection;
  std::map<std::string, int> hashtag_labels;  // profile key ("source:tag") -> subtopic
  std::map<std::string, int> item_labels;     // item id -> subtopic
  std::vector<std::vector<std::string>> word_blocks;
};

PlantedCorpus generate_corpus(const PlantedSpec& spec);

// Similarity TSV linking neighbouring words inside each block (sim 0.6), plus
// a few weak cross-block links (sim 0.1).
void write_planted_similarity(const PlantedCorpus& corpus, std::ostream& out);

// Pipeline INI for a corpus written as corpus.jsonl + similarity.tsv next to
// it: l_row = l_col = subtopics, lambda_t = 1000, lambda_o = 0.001, 16
// restarts, 200 sampler sweeps, all seeds = spec.seed.
void write_planted_config(const PlantedSpec& spec, std::ostream& out);

// "key,label" lines in key order.
void write_labels(const std::map<std::string, int>& labels, std::ostream& out);
std::map<std::string, int> read_labels(std::istream& in);

struct PlantedMatrix {
  Matrix values;
  Mapping rho;
  Mapping gamma;
};

// Block-constant matrix with distinct block values in (0, 1], plus Gaussian
// noise of scale `noise_sigma` clipped at 0. Every cluster is non-empty.
PlantedMatrix generate_block_matrix(std::size_t n_rows, std::size_t n_cols, std::size_t row_clusters,
                                    std::size_t col_clusters, double noise_sigma,
                                    std::uint64_t seed);

}  // namespace hsearch
