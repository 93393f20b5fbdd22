#include "hsearch/synth.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <sstream>

#include "hsearch/error.hpp"
#include "hsearch/random.hpp"

namespace hsearch {

void PlantedSpec::validate() const {
  if (subtopics < 1 || tags_per_subtopic < 1 || items_per_tag < 1 || words_per_subtopic < 1 ||
      words_per_item < 1)
    throw InvalidConfig("planted corpus counts must be >= 1");
  if (!(noise >= 0.0 && noise < 1.0)) throw InvalidConfig("noise must lie in [0,1)");
  if (!(cooccur_rate >= 0.0 && cooccur_rate <= 1.0) || !(extended_rate >= 0.0 && extended_rate <= 1.0))
    throw InvalidConfig("rates must lie in [0,1]");
}

namespace {

std::string short_name(Source s) {
  switch (s) {
    case Source::Twitter: return "tw";
    case Source::Flickr: return "fl";
    case Source::YouTube: return "yt";
  }
  return "xx";
}

}  // namespace

PlantedCorpus generate_corpus(const PlantedSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  PlantedCorpus out;
  out.collection.set_query("planted");

  std::vector<std::string> all_words;
  out.word_blocks.resize(spec.subtopics);
  for (std::size_t s = 0; s < spec.subtopics; ++s)
    for (std::size_t w = 0; w < spec.words_per_subtopic; ++w) {
      out.word_blocks[s].push_back("s" + std::to_string(s) + "w" + std::to_string(w));
      all_words.push_back(out.word_blocks[s].back());
    }

  constexpr std::int64_t kEpoch = 1'500'000'000;
  for (Source src : kAllSources) {
    for (std::size_t s = 0; s < spec.subtopics; ++s) {
      const long per_tag = std::max<long>(
          1, static_cast<long>(spec.items_per_tag) + static_cast<long>(s) * spec.items_per_tag_step);
      std::vector<std::string> tags;
      for (std::size_t k = 0; k < spec.tags_per_subtopic; ++k)
        tags.push_back("st" + std::to_string(s) + "_" + short_name(src) + std::to_string(k));
      for (std::size_t k = 0; k < tags.size(); ++k) {
        out.hashtag_labels[std::string(to_string(src)) + ":" + tags[k]] = static_cast<int>(s);
        for (long i = 0; i < per_tag; ++i) {
          Item item;
          item.id = short_name(src) + "-" + std::to_string(s) + "-" + std::to_string(k) + "-" +
                    std::to_string(i);
          item.source = src;
          std::string text;
          for (std::size_t n = 0; n < spec.words_per_item; ++n) {
            const std::string& w = rng.uniform() < spec.noise
                                       ? all_words[rng.below(all_words.size())]
                                       : out.word_blocks[s][rng.below(spec.words_per_subtopic)];
            if (!text.empty()) text += ' ';
            text += w;
          }
          item.text = std::move(text);
          item.hashtags.push_back(tags[k]);
          if (tags.size() > 1 && rng.uniform() < spec.cooccur_rate) {
            std::size_t other = rng.below(tags.size() - 1);
            if (other >= k) ++other;
            item.hashtags.push_back(tags[other]);
          }
          item.timestamp = kEpoch + static_cast<std::int64_t>(rng.below(86'400 * 30));
          item.comments = static_cast<std::int64_t>(rng.below(50));
          item.endorsements = static_cast<std::int64_t>(rng.below(500));
          if (src == Source::Flickr)
            item.image = ImageSize{static_cast<std::int64_t>(640 + 64 * rng.below(20)),
                                   static_cast<std::int64_t>(480 + 48 * rng.below(20))};
          if (src == Source::YouTube) item.duration = static_cast<double>(30 + rng.below(600));
          item.extended = rng.uniform() < spec.extended_rate;
          out.item_labels[item.id] = static_cast<int>(s);
          out.collection.add(std::move(item));
        }
      }
    }
  }
  return out;
}

void write_planted_similarity(const PlantedCorpus& corpus, std::ostream& out) {
  out << "# word1\tword2\tsimilarity\n";
  const auto& blocks = corpus.word_blocks;
  for (const auto& block : blocks)
    for (std::size_t w = 0; w + 1 < block.size(); ++w)
      out << block[w] << '\t' << block[w + 1] << "\t0.6\n";
  for (std::size_t s = 0; s + 1 < blocks.size(); ++s)
    if (!blocks[s].empty() && !blocks[s + 1].empty())
      out << blocks[s].front() << '\t' << blocks[s + 1].front() << "\t0.1\n";
}

void write_planted_config(const PlantedSpec& spec, std::ostream& out) {
  out << "[input]\ncorpus = corpus.jsonl\nsimilarity = similarity.tsv\nquery = planted\n\n"
      << "[output]\ndir = out\n\n"
      << "[hlda]\niterations = 200\nseed = " << spec.seed << "\n\n"
      << "[cocluster]\nl_row = " << spec.subtopics << "\nl_col = " << spec.subtopics
      << "\nlambda_t = 1000\nlambda_o = 0.001\nrestarts = 16\nseed = " << spec.seed << "\n";
}

void write_labels(const std::map<std::string, int>& labels, std::ostream& out) {
  for (const auto& [key, label] : labels) out << key << ',' << label << '\n';
}

std::map<std::string, int> read_labels(std::istream& in) {
  std::map<std::string, int> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto comma = line.rfind(',');
    if (comma == std::string::npos)
      throw ParseError("label line " + std::to_string(lineno) + ": expected 'key,label'");
    try {
      std::size_t used = 0;
      const std::string value = line.substr(comma + 1);
      int label = std::stoi(value, &used);
      if (used != value.size()) throw std::invalid_argument("trailing characters");
      if (!labels.emplace(line.substr(0, comma), label).second)
        throw ParseError("label line " + std::to_string(lineno) + ": duplicate key");
    } catch (const std::logic_error&) {
      throw ParseError("label line " + std::to_string(lineno) + ": bad integer label");
    }
  }
  return labels;
}

PlantedMatrix generate_block_matrix(std::size_t n_rows, std::size_t n_cols, std::size_t row_clusters,
                                    std::size_t col_clusters, double noise_sigma,
                                    std::uint64_t seed) {
  if (row_clusters < 1 || row_clusters > n_rows || col_clusters < 1 || col_clusters > n_cols)
    throw InvalidConfig("cluster counts must lie in [1, dimension]");
  if (noise_sigma < 0) throw InvalidConfig("noise_sigma must be non-negative");
  Rng rng(seed);
  auto planted = [&rng](std::size_t n, std::size_t k) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    Mapping map(n);
    for (std::size_t i = 0; i < n; ++i)
      map[order[i]] = static_cast<std::uint32_t>(i < k ? i : rng.below(k));
    return map;
  };
  PlantedMatrix out;
  out.rho = planted(n_rows, row_clusters);
  out.gamma = planted(n_cols, col_clusters);

  const std::size_t n_blocks = row_clusters * col_clusters;
  std::vector<std::size_t> levels(n_blocks);
  std::iota(levels.begin(), levels.end(), 1);
  rng.shuffle(levels);
  out.values.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_cols));
  for (std::size_t i = 0; i < n_rows; ++i)
    for (std::size_t j = 0; j < n_cols; ++j) {
      const double base = static_cast<double>(levels[out.rho[i] * col_clusters + out.gamma[j]]) /
                          static_cast<double>(n_blocks);
      const double noisy = noise_sigma > 0 ? base + noise_sigma * rng.normal() : base;
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::max(0.0, noisy);
    }
  return out;
}

}  // namespace hsearch
