#include "hsearch/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <sstream>

#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "hsearch/error.hpp"

namespace hsearch {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Configuration

namespace {

template <typename T>
T parse_value(const std::string& key, const std::string& value) {
  try {
    if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
      if (!value.empty() && value.front() == '-') throw boost::bad_lexical_cast();
    }
    return boost::lexical_cast<T>(value);
  } catch (const boost::bad_lexical_cast&) {
    throw InvalidConfig("bad value '" + value + "' for " + key);
  }
}

std::string trim_copy(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace

void PipelineConfig::set(const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim_copy(raw_key);
  const std::string value = trim_copy(raw_value);
  using Setter = std::function<void(PipelineConfig&, const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"input.corpus", [](PipelineConfig& c, const std::string& v) { c.input = v; }},
      {"input.similarity", [](PipelineConfig& c, const std::string& v) { c.similarity = v; }},
      {"input.query", [](PipelineConfig& c, const std::string& v) { c.query = v; }},
      {"output.dir", [](PipelineConfig& c, const std::string& v) { c.output_dir = v; }},
      {"tokenizer.min_freq",
       [](PipelineConfig& c, const std::string& v) { c.min_freq = parse_value<std::size_t>("tokenizer.min_freq", v); }},
      {"tokenizer.stopwords",
       [](PipelineConfig& c, const std::string& v) {
         if (v.empty()) c.stopwords.reset(); else c.stopwords = fs::path(v);
       }},
      {"hlda.alpha", [](PipelineConfig& c, const std::string& v) { c.hlda.alpha = parse_value<double>("hlda.alpha", v); }},
      {"hlda.gamma", [](PipelineConfig& c, const std::string& v) { c.hlda.gamma = parse_value<double>("hlda.gamma", v); }},
      {"hlda.eta", [](PipelineConfig& c, const std::string& v) { c.hlda.eta = parse_value<double>("hlda.eta", v); }},
      {"hlda.iterations",
       [](PipelineConfig& c, const std::string& v) { c.hlda.iterations = parse_value<std::size_t>("hlda.iterations", v); }},
      {"hlda.seed", [](PipelineConfig& c, const std::string& v) { c.hlda.seed = parse_value<std::uint64_t>("hlda.seed", v); }},
      {"walk.alpha", [](PipelineConfig& c, const std::string& v) { c.walk_alpha = parse_value<double>("walk.alpha", v); }},
      {"walk.threshold",
       [](PipelineConfig& c, const std::string& v) { c.walk_threshold = parse_value<double>("walk.threshold", v); }},
      {"walk.tol", [](PipelineConfig& c, const std::string& v) { c.walk_tol = parse_value<double>("walk.tol", v); }},
      {"walk.max_iter",
       [](PipelineConfig& c, const std::string& v) { c.walk_max_iter = parse_value<std::size_t>("walk.max_iter", v); }},
      {"walk.mode",
       [](PipelineConfig& c, const std::string& v) {
         if (v == "iterative") c.walk_mode = WalkMode::Iterative;
         else if (v == "closed_form") c.walk_mode = WalkMode::ClosedForm;
         else throw InvalidConfig("walk.mode must be 'iterative' or 'closed_form'");
       }},
      {"cocluster.l_row",
       [](PipelineConfig& c, const std::string& v) { c.cocluster.row_clusters = parse_value<std::size_t>("cocluster.l_row", v); }},
      {"cocluster.l_col",
       [](PipelineConfig& c, const std::string& v) { c.cocluster.col_clusters = parse_value<std::size_t>("cocluster.l_col", v); }},
      {"cocluster.lambda_t",
       [](PipelineConfig& c, const std::string& v) { c.cocluster.lambda_topic = parse_value<double>("cocluster.lambda_t", v); }},
      {"cocluster.lambda_o",
       [](PipelineConfig& c, const std::string& v) { c.cocluster.lambda_cooccur = parse_value<double>("cocluster.lambda_o", v); }},
      {"cocluster.restarts",
       [](PipelineConfig& c, const std::string& v) { c.restarts = parse_value<std::size_t>("cocluster.restarts", v); }},
      {"cocluster.seed",
       [](PipelineConfig& c, const std::string& v) { c.cocluster.seed = parse_value<std::uint64_t>("cocluster.seed", v); }},
      {"cocluster.max_iter",
       [](PipelineConfig& c, const std::string& v) { c.cocluster.max_iter = parse_value<std::size_t>("cocluster.max_iter", v); }},
      {"cocluster.tol",
       [](PipelineConfig& c, const std::string& v) { c.cocluster.tol = parse_value<double>("cocluster.tol", v); }},
      {"ranking.psi", [](PipelineConfig& c, const std::string& v) { c.ranking.psi = parse_value<double>("ranking.psi", v); }},
      {"ranking.description_words",
       [](PipelineConfig& c, const std::string& v) { c.description_words = parse_value<std::size_t>("ranking.description_words", v); }},
      {"ranking.tol", [](PipelineConfig& c, const std::string& v) { c.ranking.tol = parse_value<double>("ranking.tol", v); }},
      {"ranking.max_iter",
       [](PipelineConfig& c, const std::string& v) { c.ranking.max_iter = parse_value<std::size_t>("ranking.max_iter", v); }},
  };
  auto it = setters.find(key);
  if (it == setters.end()) throw InvalidConfig("unknown configuration key '" + key + "'");
  it->second(*this, value);
}

void PipelineConfig::validate() const {
  if (input.empty()) throw InvalidConfig("input.corpus is required");
  if (similarity.empty()) throw InvalidConfig("input.similarity is required");
  if (cocluster.row_clusters < 1) throw InvalidConfig("cocluster.l_row is required and must be >= 1");
  if (cocluster.col_clusters < 1) throw InvalidConfig("cocluster.l_col must be >= 1");
  if (restarts < 1) throw InvalidConfig("cocluster.restarts must be >= 1");
  if (min_freq < 1) throw InvalidConfig("tokenizer.min_freq must be >= 1");
  if (!(walk_alpha > 0 && walk_alpha < 1)) throw InvalidConfig("walk.alpha must lie in (0,1)");
  if (!(walk_threshold >= 0 && walk_threshold < 1)) throw InvalidConfig("walk.threshold must lie in [0,1)");
  if (!(ranking.psi > 0)) throw InvalidConfig("ranking.psi must be positive");
  if (description_words < 1) throw InvalidConfig("ranking.description_words must be >= 1");
  hlda.validate();
}

PipelineConfig load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  if (!fs::exists(path)) throw FileNotFound("cannot open config file " + path.string());
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(e.what());
  }
  PipelineConfig cfg;
  for (const auto& [section, entries] : tree) {
    if (entries.empty()) throw InvalidConfig("key '" + section + "' must sit inside a section");
    for (const auto& [key, value] : entries) cfg.set(section + "." + key, value.data());
  }
  const fs::path base = path.parent_path();
  auto resolve = [&](fs::path& p) {
    if (!p.empty() && p.is_relative()) p = base / p;
  };
  resolve(cfg.input);
  resolve(cfg.similarity);
  resolve(cfg.output_dir);
  if (cfg.stopwords) resolve(*cfg.stopwords);

  for (const auto& ov : overrides) {
    auto eq = ov.find('=');
    if (eq == std::string::npos) throw InvalidConfig("override '" + ov + "' is not key=value");
    cfg.set(ov.substr(0, eq), ov.substr(eq + 1));
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Hierarchy serialization

ordered_json hierarchy_to_json(const Hierarchy& h) {
  ordered_json clusters = ordered_json::array();
  for (const auto& c : h.clusters) {
    ordered_json words = ordered_json::array();
    for (const auto& w : c.description) words.push_back(w.word);
    ordered_json tags = ordered_json::array();
    for (const auto& t : c.hashtags) {
      ordered_json items = ordered_json::array();
      for (const auto& it : t.items) {
        ordered_json j;
        j["id"] = it.id;
        j["timestamp"] = it.timestamp;
        j["text"] = it.text;
        j["comments"] = it.comments;
        j["endorsements"] = it.endorsements;
        items.push_back(std::move(j));
      }
      ordered_json j;
      j["tag"] = t.tag;
      j["source"] = std::string(to_string(t.source));
      j["weight"] = t.weight;
      j["items"] = std::move(items);
      tags.push_back(std::move(j));
    }
    ordered_json j;
    j["rank"] = c.rank;
    j["importance"] = c.importance;
    j["description"] = std::move(words);
    j["hashtags"] = std::move(tags);
    clusters.push_back(std::move(j));
  }
  ordered_json out;
  out["query"] = h.query;
  out["clusters"] = std::move(clusters);
  return out;
}

std::vector<std::string> validate_hierarchy_json(const ordered_json& j) {
  std::vector<std::string> problems;
  auto need = [&](const ordered_json& obj, const char* key, auto pred, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
      problems.push_back(where + ": missing '" + key + "'");
      return false;
    }
    if (!pred(obj.at(key))) {
      problems.push_back(where + ": '" + key + "' has the wrong type");
      return false;
    }
    return true;
  };
  auto is_string = [](const ordered_json& v) { return v.is_string(); };
  auto is_array = [](const ordered_json& v) { return v.is_array(); };
  auto is_number = [](const ordered_json& v) { return v.is_number(); };
  auto is_count = [](const ordered_json& v) {
    return v.is_number_integer() && v.get<std::int64_t>() >= 0;
  };
  auto is_rank = [](const ordered_json& v) {
    return v.is_number_integer() && v.get<std::int64_t>() >= 1;
  };

  if (!j.is_object()) return {"root: not an object"};
  need(j, "query", is_string, "root");
  if (!need(j, "clusters", is_array, "root")) return problems;
  double prev_importance = std::numeric_limits<double>::infinity();
  std::int64_t expected_rank = 1;
  for (std::size_t c = 0; c < j["clusters"].size(); ++c) {
    const auto& cl = j["clusters"][c];
    const std::string where = "clusters[" + std::to_string(c) + "]";
    if (need(cl, "rank", is_rank, where) && cl["rank"].get<std::int64_t>() != expected_rank)
      problems.push_back(where + ": ranks must be consecutive from 1");
    ++expected_rank;
    if (need(cl, "importance", is_number, where)) {
      const double imp = cl["importance"].get<double>();
      if (imp > prev_importance) problems.push_back(where + ": importance not descending");
      prev_importance = imp;
    }
    if (need(cl, "description", is_array, where))
      for (const auto& w : cl["description"])
        if (!w.is_string()) problems.push_back(where + ": description words must be strings");
    if (!need(cl, "hashtags", is_array, where)) continue;
    for (std::size_t t = 0; t < cl["hashtags"].size(); ++t) {
      const auto& tag = cl["hashtags"][t];
      const std::string tw = where + ".hashtags[" + std::to_string(t) + "]";
      need(tag, "tag", is_string, tw);
      if (need(tag, "source", is_string, tw) && !parse_source(tag["source"].get<std::string>()))
        problems.push_back(tw + ": unknown source");
      if (need(tag, "weight", is_number, tw)) {
        const double w = tag["weight"].get<double>();
        if (w < 0 || w > 1) problems.push_back(tw + ": weight outside [0,1]");
      }
      if (!need(tag, "items", is_array, tw)) continue;
      std::int64_t prev_ts = std::numeric_limits<std::int64_t>::min();
      for (std::size_t i = 0; i < tag["items"].size(); ++i) {
        const auto& it = tag["items"][i];
        const std::string iw = tw + ".items[" + std::to_string(i) + "]";
        need(it, "id", is_string, iw);
        if (need(it, "timestamp", is_count, iw)) {
          const auto ts = it["timestamp"].get<std::int64_t>();
          if (ts < prev_ts) problems.push_back(iw + ": items not chronological");
          prev_ts = ts;
        }
        need(it, "text", is_string, iw);
        need(it, "comments", is_count, iw);
        need(it, "endorsements", is_count, iw);
      }
    }
  }
  return problems;
}

namespace {

std::string html_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(4);
  os << std::fixed << v;
  return os.str();
}

}  // namespace

std::string render_report(const ordered_json& h) {
  std::ostringstream out;
  const std::string query = html_escape(h.value("query", ""));
  out << "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n"
      << "<title>" << query << " - hashtag clusters</title>\n"
      << "<style>body{font-family:sans-serif;max-width:60em;margin:auto}"
         "section{border-top:1px solid #ccc;margin-top:1em}"
         ".words{color:#555}.item{margin-left:2em;font-size:90%}</style>\n"
      << "</head>\n<body>\n<h1>" << query << "</h1>\n";

  out << "<nav>\n<ol>\n";
  for (const auto& c : h["clusters"]) {
    const std::string rank = std::to_string(c["rank"].get<std::int64_t>());
    std::string words;
    for (const auto& w : c["description"]) words += (words.empty() ? "" : ", ") + w.get<std::string>();
    out << "<li><a href=\"#cluster-" << rank << "\">cluster " << rank << "</a> <span class=\"words\">"
        << html_escape(words) << "</span></li>\n";
  }
  out << "</ol>\n</nav>\n";

  for (const auto& c : h["clusters"]) {
    const std::string rank = std::to_string(c["rank"].get<std::int64_t>());
    std::string words;
    for (const auto& w : c["description"]) words += (words.empty() ? "" : ", ") + w.get<std::string>();
    out << "<section id=\"cluster-" << rank << "\">\n<h2>Cluster " << rank << " <small>importance "
        << format_number(c["importance"].get<double>()) << "</small></h2>\n<p class=\"words\">"
        << html_escape(words) << "</p>\n";
    for (const auto& t : c["hashtags"]) {
      const std::string src = t["source"].get<std::string>();
      const std::string tag = t["tag"].get<std::string>();
      out << "<h3>#" << html_escape(tag) << " <small>" << html_escape(src) << ", weight "
          << format_number(t["weight"].get<double>()) << "</small></h3>\n<ul>\n";
      for (const auto& it : t["items"]) {
        out << "<li class=\"item\" id=\"item-" << html_escape(it["id"].get<std::string>()) << "-"
            << rank << "\"><b>" << it["timestamp"].get<std::int64_t>() << "</b> "
            << html_escape(it["text"].get<std::string>()) << " <small>(" << it["comments"].get<std::int64_t>()
            << " comments, " << it["endorsements"].get<std::int64_t>() << " endorsements)</small></li>\n";
      }
      out << "</ul>\n";
    }
    out << "</section>\n";
  }
  out << "</body>\n</html>\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

template <typename F>
auto in_stage(const char* stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  } catch (const std::exception& e) {
    throw StageError(stage, "InternalError", e.what());
  }
}

ordered_json config_to_json(const PipelineConfig& c) {
  ordered_json j;
  j["input"] = {{"corpus", c.input.generic_string()},
                {"similarity", c.similarity.generic_string()},
                {"query", c.query}};
  j["tokenizer"] = {{"min_freq", c.min_freq},
                    {"stopwords", c.stopwords ? c.stopwords->generic_string() : std::string("<built-in>")}};
  j["hlda"] = {{"alpha", c.hlda.alpha}, {"gamma", c.hlda.gamma}, {"eta", c.hlda.eta},
               {"iterations", c.hlda.iterations}, {"seed", c.hlda.seed}};
  j["walk"] = {{"alpha", c.walk_alpha}, {"threshold", c.walk_threshold}, {"tol", c.walk_tol},
               {"max_iter", c.walk_max_iter},
               {"mode", c.walk_mode == WalkMode::Iterative ? "iterative" : "closed_form"}};
  j["cocluster"] = {{"l_row", c.cocluster.row_clusters}, {"l_col", c.cocluster.col_clusters},
                    {"lambda_t", c.cocluster.lambda_topic}, {"lambda_o", c.cocluster.lambda_cooccur},
                    {"restarts", c.restarts}, {"seed", c.cocluster.seed},
                    {"max_iter", c.cocluster.max_iter}, {"tol", c.cocluster.tol}};
  j["ranking"] = {{"psi", c.ranking.psi}, {"description_words", c.description_words},
                  {"tol", c.ranking.tol}, {"max_iter", c.ranking.max_iter}};
  return j;
}

ordered_json optional_number(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace

RunArtifacts run_pipeline(const PipelineConfig& cfg_in) {
  PipelineConfig cfg = cfg_in;
  in_stage("config", [&] { cfg.validate(); return 0; });

  ordered_json log;
  ordered_json notes = ordered_json::array();
  log["config"] = config_to_json(cfg);

  // --- corpus -------------------------------------------------------------
  QueryCollection qc;
  TokenizerConfig tok;
  std::vector<HashtagProfile> all_profiles;
  in_stage("corpus", [&] {
    IngestResult ing = ingest(cfg.input, cfg.query);
    qc = std::move(ing.collection);
    ordered_json viol = ordered_json::array();
    for (const auto& v : ing.violations) viol.push_back({{"line", v.line}, {"message", v.message}});
    log["corpus"]["query"] = qc.query();
    log["corpus"]["invalid_lines"] = viol;
    tok.stopwords = cfg.stopwords ? load_stopwords(*cfg.stopwords) : default_stopwords();
    tok.min_freq = cfg.min_freq;
    all_profiles = extract_hashtag_profiles(qc);
    const CorpusStats stats = corpus_stats(qc);
    for (Source s : kAllSources) {
      const SourceStats& st = stats[s];
      log["corpus"]["stats"][std::string(to_string(s))] = {
          {"items", st.items},
          {"mean_pixels", optional_number(st.mean_pixels)},
          {"mean_duration", optional_number(st.mean_duration)},
          {"hashtag_fraction", st.hashtag_fraction},
          {"unique_hashtags", st.unique_hashtags},
          {"mean_comments", optional_number(st.mean_comments)},
          {"mean_endorsements", optional_number(st.mean_endorsements)}};
    }
    log["corpus"]["profiles"] = all_profiles.size();
    return 0;
  });

  // --- topics -------------------------------------------------------------
  struct SourceFit {
    Source source;
    Vocabulary vocab;
    TopicModel model;
  };
  std::vector<SourceFit> fits;
  in_stage("topics", [&] {
    std::vector<std::pair<Source, std::future<std::optional<SourceFit>>>> jobs;
    for (Source s : kAllSources) {
      if (qc.items(s).empty()) continue;
      HldaConfig hc = cfg.hlda;
      hc.seed = cfg.hlda.seed + static_cast<std::uint64_t>(s);
      jobs.emplace_back(s, std::async(std::launch::async, [&qc, &tok, hc, s]() -> std::optional<SourceFit> {
        Vocabulary vocab;
        try {
          vocab = build_vocabulary(std::span<const Item>(qc.items(s)), tok);
          TopicModel m = fit_source_model(qc, s, vocab, tok, hc);
          return SourceFit{s, std::move(vocab), std::move(m)};
        } catch (const EmptyVocabulary&) {
          return std::nullopt;
        } catch (const TooFewDocuments&) {
          return std::nullopt;
        }
      }));
    }
    for (auto& [s, job] : jobs) {
      auto fit = job.get();
      const std::string name(to_string(s));
      if (!fit) {
        notes.push_back("topics: " + name + " skipped (empty vocabulary or fewer than 2 documents)");
        continue;
      }
      const auto& trace = fit->model.log_likelihood_trace;
      log["topics"][name] = {{"vocabulary", fit->vocab.size()},
                             {"documents", fit->model.doc_topics.size()},
                             {"skipped_documents", fit->model.skipped_documents},
                             {"leaves", fit->model.num_leaves()},
                             {"sweeps", trace.size()},
                             {"log_likelihood_first", trace.front()},
                             {"log_likelihood_last", trace.back()}};
      fits.push_back(std::move(*fit));
    }
    if (fits.empty()) throw TooFewDocuments("no source could be topic-modeled");
    return 0;
  });

  // Profiles that survive: source modeled and at least one modeled item.
  std::vector<HashtagProfile> profiles;
  std::vector<std::size_t> topic_offset(3, 0);
  std::size_t n_topics = 0;
  in_stage("topics", [&] {
    std::map<Source, const SourceFit*> by_source;
    for (const auto& f : fits) {
      by_source[f.source] = &f;
      topic_offset[static_cast<int>(f.source)] = n_topics;
      n_topics += f.model.num_leaves();
    }
    for (auto& p : all_profiles) {
      auto f = by_source.find(p.source);
      if (f == by_source.end()) {
        notes.push_back("topics: dropped hashtag " + p.key() + " (source not modeled)");
        continue;
      }
      try {
        p.topic_dist = hashtag_topic_distribution(f->second->model, p);
      } catch (const EmptyProfile&) {
        notes.push_back("topics: dropped hashtag " + p.key() + " (no modeled documents)");
        continue;
      }
      profiles.push_back(std::move(p));
    }
    if (profiles.empty()) throw EmptyProfile("no hashtag has a topic distribution");
    return 0;
  });

  // --- wordgraph ----------------------------------------------------------
  Vocabulary vocab_all;
  UnifiedTopicSpace space;
  in_stage("wordgraph", [&] {
    std::vector<const Vocabulary*> parts;
    for (const auto& f : fits) parts.push_back(&f.vocab);
    vocab_all = Vocabulary::merge(parts);
    SimilarityTable table = load_similarity(cfg.similarity, vocab_all);
    TransitionMatrix R = build_transition(table, cfg.walk_threshold);
    std::vector<SourceTopics> models;
    for (const auto& f : fits) models.push_back({&f.model, &f.vocab});
    WalkOptions opt{cfg.walk_alpha, cfg.walk_mode, cfg.walk_tol, cfg.walk_max_iter};
    space = unify_topics(models, vocab_all, R, opt);
    log["wordgraph"] = {{"vocabulary", vocab_all.size()},
                        {"similarity_pairs", table.pairs().size()},
                        {"edges", R.R.nonZeros()},
                        {"topics", space.size()}};
    return 0;
  });

  // --- cocluster ----------------------------------------------------------
  Matrix H;
  CoClusterResult cc;
  CoClusterConfig ccfg = cfg.cocluster;
  in_stage("cocluster", [&] {
    H = Matrix::Zero(static_cast<Eigen::Index>(profiles.size()), static_cast<Eigen::Index>(n_topics));
    std::vector<double> mass(profiles.size());
    for (std::size_t h = 0; h < profiles.size(); ++h) {
      const auto off = topic_offset[static_cast<int>(profiles[h].source)];
      for (std::size_t k = 0; k < profiles[h].topic_dist.size(); ++k)
        H(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(off + k)) = profiles[h].topic_dist[k];
      mass[h] = static_cast<double>(profiles[h].item_ids.size());
    }
    const Matrix T = space.as_matrix();
    const CooccurrenceMatrix O = build_cooccurrence(profiles, qc);
    if (ccfg.col_clusters > n_topics) {
      notes.push_back("cocluster: l_col " + std::to_string(ccfg.col_clusters) + " exceeds " +
                      std::to_string(n_topics) + " topics; using " + std::to_string(n_topics));
      ccfg.col_clusters = n_topics;
    }
    cc = choose_restart(H, T, O, ccfg, cfg.restarts, mass);
    ordered_json hashtags = ordered_json::array();
    for (std::size_t h = 0; h < profiles.size(); ++h)
      hashtags.push_back({{"key", profiles[h].key()}, {"cluster", cc.rho[h]}, {"weight", cc.hashtag_weights[h]}});
    log["cocluster"] = {{"hashtags", profiles.size()},
                        {"topics", n_topics},
                        {"l_col_used", ccfg.col_clusters},
                        {"best_seed", cc.seed},
                        {"iterations", cc.iterations},
                        {"objective_trace", cc.objective_trace},
                        {"gamma", cc.gamma},
                        {"assignments", hashtags}};
    return 0;
  });

  // --- ranking ------------------------------------------------------------
  RunArtifacts out;
  in_stage("ranking", [&] {
    const std::size_t L = ccfg.row_clusters;
    const Matrix cluster_topics = cluster_topic_dist(cc, L, H);
    Matrix kappa = Matrix::Ones(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(L));
    double sigma = 0.0;
    if (L >= 2) {
      SemanticRelevance rel = semantic_relevance(cluster_topics);
      if (rel.degenerate) notes.push_back("ranking: all clusters share one topic distribution (sigma = 0)");
      kappa = rel.kappa;
      sigma = rel.sigma;
    }
    const Eigen::VectorXd U = appearance_counts(cc, L, profiles, qc);
    const RankResult ranked = rank_clusters(kappa, U, cfg.ranking);
    const Matrix T = space.as_matrix();
    std::vector<std::vector<WordScore>> descriptions;
    for (std::size_t c = 0; c < L; ++c)
      descriptions.push_back(describe_cluster(cluster_topics.row(static_cast<Eigen::Index>(c)).transpose(),
                                              T, vocab_all, cfg.description_words));
    out.hierarchy = assemble_hierarchy(cc, profiles, qc, ranked.importance, U, descriptions);
    std::vector<double> u(U.data(), U.data() + U.size());
    std::vector<double> eta(ranked.importance.data(), ranked.importance.data() + ranked.importance.size());
    log["ranking"] = {{"sigma", sigma}, {"appearances", u}, {"importance", eta},
                      {"iterations", ranked.iterations}};
    return 0;
  });

  out.hierarchy_json = hierarchy_to_json(out.hierarchy);
  out.report_html = render_report(out.hierarchy_json);
  log["notes"] = std::move(notes);
  out.run_log = std::move(log);
  return out;
}

void write_artifacts(const RunArtifacts& artifacts, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw StageError("output", "IoError", "cannot create " + dir.string() + ": " + ec.message());
  const std::vector<std::pair<std::string, std::string>> files = {
      {"hierarchy.json", artifacts.hierarchy_json.dump(2) + "\n"},
      {"report.html", artifacts.report_html},
      {"run_log.json", artifacts.run_log.dump(2) + "\n"},
  };
  std::vector<fs::path> temps;
  auto cleanup = [&] {
    for (const auto& t : temps) fs::remove(t, ec);
  };
  for (const auto& [name, body] : files) {
    fs::path tmp = dir / (name + ".tmp");
    temps.push_back(tmp);
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f << body;
    f.close();
    if (!f) {
      cleanup();
      throw StageError("output", "IoError", "cannot write " + tmp.string());
    }
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    fs::rename(temps[i], dir / files[i].first, ec);
    if (ec) {
      cleanup();
      throw StageError("output", "IoError", "cannot rename " + temps[i].string() + ": " + ec.message());
    }
  }
}

}  // namespace hsearch
