#include "hsearch/topics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>

#include "hsearch/error.hpp"
#include "hsearch/random.hpp"

namespace hsearch {

void HldaConfig::validate() const {
  if (!(alpha > 0) || !(gamma > 0) || !(eta > 0))
    throw InvalidConfig("hlda alpha, gamma and eta must be positive");
  if (iterations < 1) throw InvalidConfig("hlda iterations must be >= 1");
}

int TopicModel::leaf_assignment(std::size_t doc) const {
  const auto& dt = doc_topics.at(doc);
  return dt ? static_cast<int>(dt->leaf_index) : -1;
}

std::optional<std::size_t> TopicModel::doc_index(const std::string& id) const {
  auto it = std::find(doc_ids.begin(), doc_ids.end(), id);
  if (it == doc_ids.end()) return std::nullopt;
  return static_cast<std::size_t>(it - doc_ids.begin());
}

namespace {

constexpr int kRoot = 0;
constexpr int kLeaf = 1;

struct TopicCounts {
  std::vector<int> per_word;
  long total = 0;
  int docs = 0;  // unused for the root
  bool active = false;
};

// Collapsed state of a depth-2 nCRP tree. Leaves live in `leaves` slots;
// a slot with no documents is inactive and may be reused.
class HldaSampler {
 public:
  HldaSampler(const std::vector<const Document*>& docs, std::size_t vocab_size,
              const HldaConfig& cfg)
      : docs_(docs), V_(vocab_size), cfg_(cfg), rng_(cfg.seed) {
    root_.per_word.assign(V_, 0);
    root_.active = true;
    level_.resize(docs_.size());
    path_.assign(docs_.size(), -1);
    level_counts_.assign(docs_.size(), {0, 0});
  }

  void initialize() {
    for (std::size_t d = 0; d < docs_.size(); ++d) {
      const Document& doc = *docs_[d];
      level_[d].resize(doc.size());
      for (std::size_t n = 0; n < doc.size(); ++n) {
        int z = rng_.uniform() < 0.5 ? kRoot : kLeaf;
        level_[d][n] = static_cast<std::uint8_t>(z);
        ++level_counts_[d][z];
        if (z == kRoot) {
          ++root_.per_word[doc[n]];
          ++root_.total;
        }
      }
    }
    // Paths are placed one document at a time, each conditioned on the
    // documents already seated.
    for (std::size_t d = 0; d < docs_.size(); ++d) place_document(d);
  }

  void sweep() {
    for (std::size_t d = 0; d < docs_.size(); ++d) {
      remove_from_leaf(d);
      place_document(d);
      resample_levels(d);
    }
  }

  double log_likelihood() const {
    const double Veta = static_cast<double>(V_) * cfg_.eta;
    auto topic_ll = [&](const TopicCounts& t) {
      // zero-count words contribute lgamma(eta) - lgamma(eta) = 0
      double ll = std::lgamma(Veta) - std::lgamma(static_cast<double>(t.total) + Veta);
      for (int c : t.per_word)
        if (c) ll += std::lgamma(c + cfg_.eta) - std::lgamma(cfg_.eta);
      return ll;
    };
    double ll = topic_ll(root_);
    int active = 0;
    for (const auto& leaf : leaves_) {
      if (!leaf.active) continue;
      ++active;
      ll += topic_ll(leaf);
      ll += std::lgamma(static_cast<double>(leaf.docs));
    }
    const double D = static_cast<double>(docs_.size());
    ll += active * std::log(cfg_.gamma) + std::lgamma(cfg_.gamma) - std::lgamma(D + cfg_.gamma);
    const double a = cfg_.alpha;
    for (std::size_t d = 0; d < docs_.size(); ++d) {
      const auto& m = level_counts_[d];
      ll += std::lgamma(2 * a) - 2 * std::lgamma(a) + std::lgamma(m[0] + a) +
            std::lgamma(m[1] + a) - std::lgamma(m[0] + m[1] + 2 * a);
    }
    return ll;
  }

  TopicModel finish() const {
    TopicModel model;
    model.vocab_size = V_;
    const double Veta = static_cast<double>(V_) * cfg_.eta;
    auto dist = [&](const TopicCounts& t) {
      std::vector<double> p(V_);
      const double denom = static_cast<double>(t.total) + Veta;
      for (std::size_t w = 0; w < V_; ++w) p[w] = (t.per_word[w] + cfg_.eta) / denom;
      return p;
    };
    model.root_topic = dist(root_);
    std::vector<int> remap(leaves_.size(), -1);
    for (std::size_t s = 0; s < leaves_.size(); ++s) {
      if (!leaves_[s].active) continue;
      remap[s] = static_cast<int>(model.leaf_topics.size());
      model.leaf_topics.push_back(dist(leaves_[s]));
    }
    model.doc_topics.reserve(docs_.size());
    for (std::size_t d = 0; d < docs_.size(); ++d) {
      const auto& m = level_counts_[d];
      const double denom = m[0] + m[1] + 2 * cfg_.alpha;
      DocTopics dt;
      dt.root = (m[0] + cfg_.alpha) / denom;
      dt.leaf = 1.0 - dt.root;
      dt.leaf_index = static_cast<std::uint32_t>(remap[static_cast<std::size_t>(path_[d])]);
      model.doc_topics.emplace_back(dt);
    }
    return model;
  }

 private:
  void remove_from_leaf(std::size_t d) {
    TopicCounts& leaf = leaves_[static_cast<std::size_t>(path_[d])];
    const Document& doc = *docs_[d];
    for (std::size_t n = 0; n < doc.size(); ++n) {
      if (level_[d][n] != kLeaf) continue;
      --leaf.per_word[doc[n]];
      --leaf.total;
    }
    if (--leaf.docs == 0) leaf.active = false;
    path_[d] = -1;
  }

  void add_to_leaf(std::size_t d, std::size_t slot) {
    TopicCounts& leaf = leaves_[slot];
    if (!leaf.active) {
      leaf.active = true;
      leaf.per_word.assign(V_, 0);
      leaf.total = 0;
      leaf.docs = 0;
    }
    const Document& doc = *docs_[d];
    for (std::size_t n = 0; n < doc.size(); ++n) {
      if (level_[d][n] != kLeaf) continue;
      ++leaf.per_word[doc[n]];
      ++leaf.total;
    }
    ++leaf.docs;
    path_[d] = static_cast<int>(slot);
  }

  // Samples a leaf for document d (currently unseated) from
  //   p(c_d = k) ∝ docs_k * p(w_d,leaf | k)   and   γ * p(w_d,leaf | new leaf)
  void place_document(std::size_t d) {
    const Document& doc = *docs_[d];
    std::map<std::uint32_t, int> leaf_words;
    int n_leaf = 0;
    for (std::size_t n = 0; n < doc.size(); ++n)
      if (level_[d][n] == kLeaf) {
        ++leaf_words[doc[n]];
        ++n_leaf;
      }

    const double eta = cfg_.eta;
    const double Veta = static_cast<double>(V_) * eta;
    auto word_ll = [&](const TopicCounts* t) {
      const double total = t ? static_cast<double>(t->total) : 0.0;
      double ll = std::lgamma(total + Veta) - std::lgamma(total + n_leaf + Veta);
      for (auto [w, c] : leaf_words) {
        const double nw = t ? t->per_word[w] : 0.0;
        ll += std::lgamma(nw + c + eta) - std::lgamma(nw + eta);
      }
      return ll;
    };

    std::vector<std::size_t> slots;
    std::vector<double> logp;
    std::size_t free_slot = leaves_.size();
    for (std::size_t s = 0; s < leaves_.size(); ++s) {
      if (!leaves_[s].active) {
        if (free_slot == leaves_.size()) free_slot = s;
        continue;
      }
      slots.push_back(s);
      logp.push_back(std::log(static_cast<double>(leaves_[s].docs)) + word_ll(&leaves_[s]));
    }
    slots.push_back(free_slot);
    logp.push_back(std::log(cfg_.gamma) + word_ll(nullptr));

    const double mx = *std::max_element(logp.begin(), logp.end());
    std::vector<double> w(logp.size());
    for (std::size_t i = 0; i < logp.size(); ++i) w[i] = std::exp(logp[i] - mx);
    std::size_t slot = slots[rng_.categorical(w)];
    if (slot == leaves_.size()) leaves_.emplace_back();
    add_to_leaf(d, slot);
  }

  void resample_levels(std::size_t d) {
    const Document& doc = *docs_[d];
    TopicCounts& leaf = leaves_[static_cast<std::size_t>(path_[d])];
    auto& m = level_counts_[d];
    const double eta = cfg_.eta;
    const double Veta = static_cast<double>(V_) * eta;
    for (std::size_t n = 0; n < doc.size(); ++n) {
      const std::uint32_t w = doc[n];
      TopicCounts& cur = level_[d][n] == kRoot ? root_ : leaf;
      --cur.per_word[w];
      --cur.total;
      --m[level_[d][n]];

      double p[2];
      p[kRoot] = (m[kRoot] + cfg_.alpha) * (root_.per_word[w] + eta) /
                 (static_cast<double>(root_.total) + Veta);
      p[kLeaf] = (m[kLeaf] + cfg_.alpha) * (leaf.per_word[w] + eta) /
                 (static_cast<double>(leaf.total) + Veta);
      const int z = rng_.uniform() * (p[0] + p[1]) < p[0] ? kRoot : kLeaf;

      level_[d][n] = static_cast<std::uint8_t>(z);
      TopicCounts& next = z == kRoot ? root_ : leaf;
      ++next.per_word[w];
      ++next.total;
      ++m[z];
    }
  }

  const std::vector<const Document*>& docs_;
  std::size_t V_;
  HldaConfig cfg_;
  Rng rng_;

  TopicCounts root_;
  std::vector<TopicCounts> leaves_;
  std::vector<std::vector<std::uint8_t>> level_;
  std::vector<int> path_;
  std::vector<std::array<int, 2>> level_counts_;
};

}  // namespace

TopicModel fit_hlda(const std::vector<Document>& docs, std::size_t vocab_size,
                    const HldaConfig& cfg) {
  cfg.validate();
  std::vector<const Document*> kept;
  std::vector<std::size_t> kept_index;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (auto w : docs[d])
      if (w >= vocab_size) throw InvalidConfig("token index out of vocabulary range");
    if (docs[d].empty()) continue;
    kept.push_back(&docs[d]);
    kept_index.push_back(d);
  }
  if (kept.size() < 2)
    throw TooFewDocuments("need at least 2 non-empty documents, got " + std::to_string(kept.size()));

  HldaSampler sampler(kept, vocab_size, cfg);
  sampler.initialize();
  std::vector<double> trace;
  trace.reserve(cfg.iterations);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    sampler.sweep();
    trace.push_back(sampler.log_likelihood());
  }

  TopicModel fitted = sampler.finish();
  TopicModel model;
  model.vocab_size = vocab_size;
  model.root_topic = std::move(fitted.root_topic);
  model.leaf_topics = std::move(fitted.leaf_topics);
  model.doc_topics.assign(docs.size(), std::nullopt);
  for (std::size_t k = 0; k < kept_index.size(); ++k)
    model.doc_topics[kept_index[k]] = fitted.doc_topics[k];
  model.skipped_documents = docs.size() - kept.size();
  model.log_likelihood_trace = std::move(trace);
  return model;
}

TopicModel fit_source_model(const QueryCollection& qc, Source source, const Vocabulary& vocab,
                            const TokenizerConfig& tok, const HldaConfig& cfg) {
  const auto& items = qc.items(source);
  std::vector<Document> docs;
  std::vector<std::string> ids;
  docs.reserve(items.size());
  for (const Item& it : items) {
    docs.push_back(encode(it.text, vocab, tok));
    ids.push_back(it.id);
  }
  TopicModel model = fit_hlda(docs, vocab.size(), cfg);
  model.source = source;
  model.doc_ids = std::move(ids);
  return model;
}

std::vector<double> aggregate_leaf_distributions(const std::vector<std::vector<double>>& per_doc) {
  if (per_doc.empty()) return {};
  std::vector<double> sum(per_doc.front().size(), 0.0);
  for (const auto& v : per_doc) {
    if (v.size() != sum.size()) throw InvalidConfig("leaf vectors differ in length");
    for (std::size_t k = 0; k < v.size(); ++k) sum[k] += v[k];
  }
  const double total = std::accumulate(sum.begin(), sum.end(), 0.0);
  if (!(total > 0)) throw EmptyProfile("aggregated leaf mass is zero");
  for (double& x : sum) x /= total;
  return sum;
}

std::vector<double> hashtag_topic_distribution(const TopicModel& model,
                                               const HashtagProfile& profile) {
  std::vector<double> sum(model.num_leaves(), 0.0);
  double total = 0.0;
  for (const auto& id : profile.item_ids) {
    auto d = model.doc_index(id);
    if (!d) throw UnknownItem("item '" + id + "' was not part of the " +
                              std::string(to_string(model.source)) + " topic model");
    const auto& dt = model.doc_topics[*d];
    if (!dt) continue;
    sum[dt->leaf_index] += dt->leaf;
    total += dt->leaf;
  }
  if (!(total > 0))
    throw EmptyProfile("hashtag '" + profile.tag + "' has no modeled documents");
  for (double& x : sum) x /= total;
  return sum;
}

void dump_topics(const TopicModel& model, const Vocabulary& vocab, std::size_t top_n,
                 std::ostream& out) {
  auto print = [&](const std::string& label, const std::vector<double>& p) {
    std::vector<std::size_t> idx(p.size());
    std::iota(idx.begin(), idx.end(), 0);
    const std::size_t n = std::min(top_n, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n), idx.end(),
                      [&](std::size_t a, std::size_t b) { return p[a] > p[b] || (p[a] == p[b] && a < b); });
    out << label << ':';
    for (std::size_t i = 0; i < n; ++i)
      out << ' ' << vocab.word(idx[i]) << '=' << std::setprecision(4) << p[idx[i]];
    out << '\n';
  };
  out << "# source " << to_string(model.source) << " leaves " << model.num_leaves() << '\n';
  print("root", model.root_topic);
  for (std::size_t k = 0; k < model.num_leaves(); ++k)
    print("leaf " + std::to_string(k), model.leaf_topics[k]);
}

}  // namespace hsearch
