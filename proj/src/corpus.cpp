#include "hsearch/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>
#include <unicode/locid.h>

#include "hsearch/error.hpp"

namespace hsearch {

namespace detail {
extern const char* const kDefaultStopwords;
}

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Source s) {
  switch (s) {
    case Source::Twitter: return "twitter";
    case Source::Flickr: return "flickr";
    case Source::YouTube: return "youtube";
  }
  return "unknown";
}

std::optional<Source> parse_source(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "twitter") return Source::Twitter;
  if (lower == "flickr") return Source::Flickr;
  if (lower == "youtube") return Source::YouTube;
  return std::nullopt;
}

bool Item::has_tag(std::string_view tag) const {
  return std::find(hashtags.begin(), hashtags.end(), tag) != hashtags.end();
}

namespace {

// ICU lowercase + NFC. Invalid UTF-8 sequences come back as U+FFFD.
std::string fold_case_nfc(std::string_view text) {
  bool ascii = std::all_of(text.begin(), text.end(),
                           [](char c) { return static_cast<unsigned char>(c) < 0x80; });
  if (ascii) {
    std::string out(text);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
  }
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  u.toLower(icu::Locale::getRoot());
  std::string out;
  if (U_SUCCESS(status)) {
    icu::UnicodeString normalized = nfc->normalize(u, status);
    if (U_SUCCESS(status)) {
      normalized.toUTF8String(out);
      return out;
    }
  }
  u.toUTF8String(out);
  return out;
}

bool is_separator(unsigned char c) {
  return c < 0x80 && !std::isalnum(c);
}

}  // namespace

std::string normalize_hashtag(std::string_view raw) {
  while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.front()))) raw.remove_prefix(1);
  while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.back()))) raw.remove_suffix(1);
  while (!raw.empty() && raw.front() == '#') raw.remove_prefix(1);
  return fold_case_nfc(raw);
}

void QueryCollection::add(Item item) {
  by_source_[static_cast<int>(item.source)].push_back(std::move(item));
}

std::size_t QueryCollection::size() const {
  std::size_t n = 0;
  for (const auto& v : by_source_) n += v.size();
  return n;
}

std::vector<const Item*> QueryCollection::all_items() const {
  std::vector<const Item*> out;
  out.reserve(size());
  for (const auto& v : by_source_)
    for (const auto& it : v) out.push_back(&it);
  return out;
}

const Item* QueryCollection::find(std::string_view id) const {
  for (const auto& v : by_source_)
    for (const auto& it : v)
      if (it.id == id) return &it;
  return nullptr;
}

namespace {

std::int64_t require_count(const json& rec, const char* field) {
  auto it = rec.find(field);
  if (it == rec.end()) throw std::invalid_argument(std::string("missing field '") + field + "'");
  if (!it->is_number_integer())
    throw std::invalid_argument(std::string("field '") + field + "' must be an integer");
  auto v = it->get<std::int64_t>();
  if (v < 0) throw std::invalid_argument(std::string("field '") + field + "' must be >= 0");
  return v;
}

std::optional<std::string> optional_string(const json& rec, const char* field) {
  auto it = rec.find(field);
  if (it == rec.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw std::invalid_argument(std::string("field '") + field + "' must be a string");
  return it->get<std::string>();
}

Item parse_item(const json& rec) {
  if (!rec.is_object()) throw std::invalid_argument("record is not a JSON object");
  Item item;
  auto id = optional_string(rec, "id");
  if (!id || id->empty()) throw std::invalid_argument("missing field 'id'");
  item.id = *id;

  auto src = optional_string(rec, "source");
  if (!src) throw std::invalid_argument("missing field 'source'");
  auto parsed = parse_source(*src);
  if (!parsed) throw std::invalid_argument("unknown source '" + *src + "'");
  item.source = *parsed;

  // Flickr and YouTube records may carry title/description instead of text;
  // those are joined with a single space.
  if (auto text = optional_string(rec, "text")) {
    item.text = *text;
  } else {
    auto title = optional_string(rec, "title");
    auto desc = optional_string(rec, "description");
    if (!title && !desc) throw std::invalid_argument("missing field 'text'");
    item.text = title.value_or("");
    if (title && desc) item.text += ' ';
    item.text += desc.value_or("");
  }

  auto tags = rec.find("hashtags");
  if (tags == rec.end()) throw std::invalid_argument("missing field 'hashtags'");
  if (!tags->is_array()) throw std::invalid_argument("field 'hashtags' must be an array");
  for (const auto& t : *tags) {
    if (!t.is_string()) throw std::invalid_argument("hashtag entries must be strings");
    std::string norm = normalize_hashtag(t.get<std::string>());
    if (!norm.empty() && !item.has_tag(norm)) item.hashtags.push_back(std::move(norm));
  }

  item.timestamp = require_count(rec, "timestamp");
  item.comments = require_count(rec, "comments");
  item.endorsements = require_count(rec, "endorsements");

  bool has_w = rec.contains("width"), has_h = rec.contains("height");
  if (has_w != has_h) throw std::invalid_argument("'width' and 'height' must appear together");
  if (has_w) item.image = ImageSize{require_count(rec, "width"), require_count(rec, "height")};

  if (auto d = rec.find("duration"); d != rec.end()) {
    if (!d->is_number() || d->get<double>() < 0)
      throw std::invalid_argument("field 'duration' must be a non-negative number");
    item.duration = d->get<double>();
  }
  if (auto e = rec.find("extended"); e != rec.end()) {
    if (!e->is_boolean()) throw std::invalid_argument("field 'extended' must be a boolean");
    item.extended = e->get<bool>();
  }
  return item;
}

}  // namespace

IngestResult ingest_stream(std::istream& in, std::string query) {
  IngestResult result;
  result.collection.set_query(std::move(query));
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); }))
      continue;
    try {
      Item item = parse_item(json::parse(line));
      if (!seen.insert(item.id).second) throw std::invalid_argument("duplicate id '" + item.id + "'");
      result.collection.add(std::move(item));
    } catch (const json::exception& e) {
      result.violations.push_back({lineno, std::string("malformed JSON: ") + e.what()});
    } catch (const std::invalid_argument& e) {
      result.violations.push_back({lineno, e.what()});
    }
  }
  if (result.collection.size() == 0) {
    throw AllRecordsInvalid("no valid item records (" + std::to_string(result.violations.size()) +
                            " invalid lines)");
  }
  return result;
}

IngestResult ingest(const std::filesystem::path& path, std::string query) {
  std::ifstream in(path);
  if (!in) throw FileNotFound("cannot open corpus file " + path.string());
  if (query.empty()) query = path.stem().string();
  return ingest_stream(in, std::move(query));
}

std::string item_to_json_line(const Item& item) {
  ordered_json j;
  j["id"] = item.id;
  j["source"] = std::string(to_string(item.source));
  j["text"] = item.text;
  j["hashtags"] = item.hashtags;
  j["timestamp"] = item.timestamp;
  j["comments"] = item.comments;
  j["endorsements"] = item.endorsements;
  if (item.image) {
    j["width"] = item.image->width;
    j["height"] = item.image->height;
  }
  if (item.duration) j["duration"] = *item.duration;
  if (item.extended) j["extended"] = true;
  return j.dump();
}

void write_jsonl(const QueryCollection& qc, std::ostream& out) {
  for (const Item* it : qc.all_items()) out << item_to_json_line(*it) << '\n';
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
  std::sort(words_.begin(), words_.end());
  words_.erase(std::unique(words_.begin(), words_.end()), words_.end());
  index_.reserve(words_.size());
  for (std::uint32_t i = 0; i < words_.size(); ++i) index_.emplace(words_[i], i);
}

std::optional<std::uint32_t> Vocabulary::index(std::string_view w) const {
  auto it = index_.find(std::string(w));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary Vocabulary::merge(std::span<const Vocabulary* const> parts) {
  std::vector<std::string> all;
  for (const Vocabulary* v : parts)
    if (v) all.insert(all.end(), v->words().begin(), v->words().end());
  return Vocabulary(std::move(all));
}

static std::unordered_set<std::string> parse_stopword_lines(std::istream& in) {
  std::unordered_set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string w = fold_case_nfc(line);
    w.erase(std::remove_if(w.begin(), w.end(), [](unsigned char c) { return std::isspace(c); }),
            w.end());
    if (!w.empty()) out.insert(std::move(w));
  }
  return out;
}

std::unordered_set<std::string> default_stopwords() {
  std::istringstream in(detail::kDefaultStopwords);
  return parse_stopword_lines(in);
}

std::unordered_set<std::string> load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound("cannot open stopword list " + path.string());
  return parse_stopword_lines(in);
}

TokenizerConfig TokenizerConfig::with_default_stopwords(std::size_t min_freq) {
  return TokenizerConfig{default_stopwords(), min_freq};
}

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& cfg) {
  std::string folded = fold_case_nfc(text);
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty() && !cfg.stopwords.contains(cur)) out.push_back(cur);
    cur.clear();
  };
  for (char c : folded) {
    if (is_separator(static_cast<unsigned char>(c)))
      flush();
    else
      cur.push_back(c);
  }
  flush();
  return out;
}

Vocabulary build_vocabulary(std::span<const Item* const> items, const TokenizerConfig& cfg) {
  std::map<std::string, std::size_t> freq;
  for (const Item* it : items)
    for (auto& tok : tokenize(it->text, cfg)) ++freq[tok];
  std::vector<std::string> words;
  for (auto& [w, n] : freq)
    if (n >= cfg.min_freq) words.push_back(w);
  if (words.empty()) throw EmptyVocabulary("no token survives tokenizer filtering");
  return Vocabulary(std::move(words));
}

Vocabulary build_vocabulary(std::span<const Item> items, const TokenizerConfig& cfg) {
  std::vector<const Item*> ptrs;
  ptrs.reserve(items.size());
  for (const auto& it : items) ptrs.push_back(&it);
  return build_vocabulary(std::span<const Item* const>(ptrs), cfg);
}

std::vector<std::uint32_t> encode(std::string_view text, const Vocabulary& vocab,
                                  const TokenizerConfig& cfg) {
  std::vector<std::uint32_t> out;
  for (auto& tok : tokenize(text, cfg))
    if (auto idx = vocab.index(tok)) out.push_back(*idx);
  return out;
}

// ---------------------------------------------------------------------------
// Hashtags

std::string HashtagProfile::key() const {
  return std::string(to_string(source)) + ":" + tag;
}

std::vector<HashtagProfile> extract_hashtag_profiles(const QueryCollection& qc) {
  std::vector<HashtagProfile> out;
  for (Source s : kAllSources) {
    std::map<std::string, std::set<std::string>> by_tag;
    for (const Item& it : qc.items(s))
      for (const auto& tag : it.hashtags) by_tag[tag].insert(it.id);
    for (auto& [tag, ids] : by_tag) out.push_back(HashtagProfile{tag, s, std::move(ids), {}});
  }
  return out;
}

CooccurrenceMatrix build_cooccurrence(std::span<const HashtagProfile> profiles,
                                      const QueryCollection& qc) {
  const auto n = static_cast<Eigen::Index>(profiles.size());
  CooccurrenceMatrix O = CooccurrenceMatrix::Zero(n, n);
  std::map<std::pair<int, std::string>, Eigen::Index> row_of;
  for (Eigen::Index i = 0; i < n; ++i)
    row_of[{static_cast<int>(profiles[i].source), profiles[i].tag}] = i;
  for (const Item* it : qc.all_items()) {
    std::vector<Eigen::Index> rows;
    for (const auto& tag : it->hashtags) {
      auto f = row_of.find({static_cast<int>(it->source), tag});
      if (f != row_of.end()) rows.push_back(f->second);
    }
    for (std::size_t a = 0; a < rows.size(); ++a)
      for (std::size_t b = a + 1; b < rows.size(); ++b) {
        O(rows[a], rows[b]) += 1.0;
        O(rows[b], rows[a]) += 1.0;
      }
  }
  return O;
}

CorpusStats corpus_stats(const QueryCollection& qc) {
  CorpusStats stats;
  for (Source s : kAllSources) {
    const auto& items = qc.items(s);
    SourceStats& st = stats.per_source[static_cast<int>(s)];
    st.items = items.size();
    double pixels = 0, duration = 0, comments = 0, endorsements = 0;
    std::size_t n_img = 0, n_vid = 0, n_tagged = 0;
    std::set<std::string> tags;
    for (const Item& it : items) {
      if (it.image) {
        pixels += static_cast<double>(it.image->width) * static_cast<double>(it.image->height);
        ++n_img;
      }
      if (it.duration) {
        duration += *it.duration;
        ++n_vid;
      }
      if (!it.hashtags.empty()) ++n_tagged;
      tags.insert(it.hashtags.begin(), it.hashtags.end());
      comments += static_cast<double>(it.comments);
      endorsements += static_cast<double>(it.endorsements);
    }
    if (n_img) st.mean_pixels = pixels / static_cast<double>(n_img);
    if (n_vid) st.mean_duration = duration / static_cast<double>(n_vid);
    if (!items.empty()) {
      const auto n = static_cast<double>(items.size());
      st.hashtag_fraction = static_cast<double>(n_tagged) / n;
      st.mean_comments = comments / n;
      st.mean_endorsements = endorsements / n;
    }
    st.unique_hashtags = tags.size();
  }
  return stats;
}

}  // namespace hsearch
