#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

namespace hsearch {

enum class Source : std::uint8_t { Twitter = 0, Flickr = 1, YouTube = 2 };

inline constexpr std::array<Source, 3> kAllSources = {Source::Twitter, Source::Flickr,
                                                      Source::YouTube};

std::string_view to_string(Source s);
// Accepts "twitter" | "flickr" | "youtube" (case-insensitive).
std::optional<Source> parse_source(std::string_view name);

struct ImageSize {
  std::int64_t width = 0;
  std::int64_t height = 0;
  bool operator==(const ImageSize&) const = default;
};

struct Item {
  std::string id;
  Source source = Source::Twitter;
  std::string text;
  std::vector<std::string> hashtags;  // normalized, unique, insertion order
  std::int64_t timestamp = 0;
  std::int64_t comments = 0;
  std::int64_t endorsements = 0;
  std::optional<ImageSize> image;
  std::optional<double> duration;
  // True when the item was fetched by querying a hashtag rather than
  // returned directly for the query.
  bool extended = false;

  bool has_tag(std::string_view tag) const;
  bool operator==(const Item&) const = default;
};

// Lowercase + NFC + strip leading '#'. Returns an empty string for tags that
// normalize to nothing.
std::string normalize_hashtag(std::string_view raw);

class QueryCollection {
 public:
  QueryCollection() = default;
  explicit QueryCollection(std::string query) : query_(std::move(query)) {}

  // Appends to the list matching item.source.
  void add(Item item);

  const std::string& query() const { return query_; }
  void set_query(std::string q) { query_ = std::move(q); }
  const std::vector<Item>& items(Source s) const { return by_source_[static_cast<int>(s)]; }
  std::size_t size() const;
  // Twitter, then Flickr, then YouTube; insertion order within a source.
  std::vector<const Item*> all_items() const;
  const Item* find(std::string_view id) const;

  bool operator==(const QueryCollection&) const = default;

 private:
  std::string query_;
  std::array<std::vector<Item>, 3> by_source_;
};

struct SchemaViolation {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct IngestResult {
  QueryCollection collection;
  std::vector<SchemaViolation> violations;
};

// Reads JSONL; one item per line. Blank lines are ignored. Throws
// FileNotFound, or AllRecordsInvalid when no line yields an item.
IngestResult ingest(const std::filesystem::path& path, std::string query = {});
IngestResult ingest_stream(std::istream& in, std::string query = {});

// Serializes items in all_items() order. Output re-ingests to an equal collection.
void write_jsonl(const QueryCollection& qc, std::ostream& out);
std::string item_to_json_line(const Item& item);

class Vocabulary {
 public:
  Vocabulary() = default;
  // Words are sorted and deduplicated.
  explicit Vocabulary(std::vector<std::string> words);

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  const std::string& word(std::size_t i) const { return words_.at(i); }
  const std::vector<std::string>& words() const { return words_; }
  std::optional<std::uint32_t> index(std::string_view w) const;

  static Vocabulary merge(std::span<const Vocabulary* const> parts);

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct TokenizerConfig {
  std::unordered_set<std::string> stopwords;
  std::size_t min_freq = 2;

  // English list shipped in data/stopwords_en.txt, compiled in.
  static TokenizerConfig with_default_stopwords(std::size_t min_freq = 2);
};

std::unordered_set<std::string> default_stopwords();
std::unordered_set<std::string> load_stopwords(const std::filesystem::path& path);

// Lowercases, splits on whitespace and ASCII punctuation, drops stopwords.
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& cfg);

// Throws EmptyVocabulary when nothing survives filtering.
Vocabulary build_vocabulary(std::span<const Item* const> items, const TokenizerConfig& cfg);
Vocabulary build_vocabulary(std::span<const Item> items, const TokenizerConfig& cfg);

// Token indices of `text` in `vocab`; out-of-vocabulary tokens are dropped.
std::vector<std::uint32_t> encode(std::string_view text, const Vocabulary& vocab,
                                  const TokenizerConfig& cfg);

struct HashtagProfile {
  std::string tag;
  Source source = Source::Twitter;
  std::set<std::string> item_ids;
  std::vector<double> topic_dist;  // empty until filled by the topics stage

  std::string key() const;  // "<source>:<tag>"
};

// One profile per (source, tag); ordered by source then tag.
std::vector<HashtagProfile> extract_hashtag_profiles(const QueryCollection& qc);

using CooccurrenceMatrix = Eigen::MatrixXd;

CooccurrenceMatrix build_cooccurrence(std::span<const HashtagProfile> profiles,
                                      const QueryCollection& qc);

struct SourceStats {
  std::size_t items = 0;
  std::optional<double> mean_pixels;
  std::optional<double> mean_duration;
  double hashtag_fraction = 0.0;
  std::size_t unique_hashtags = 0;
  std::optional<double> mean_comments;
  std::optional<double> mean_endorsements;
};

struct CorpusStats {
  std::array<SourceStats, 3> per_source;
  const SourceStats& operator[](Source s) const { return per_source[static_cast<int>(s)]; }
};

CorpusStats corpus_stats(const QueryCollection& qc);

}  // namespace hsearch
