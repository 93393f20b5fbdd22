// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

#include <spdlog/spdlog.h>

#include "hsearch/cocluster.hpp"
#include "hsearch/metrics.hpp"
#include "hsearch/pipeline.hpp"
#include "hsearch/random.hpp"
#include "hsearch/ranking.hpp"
#include "hsearch/synth.hpp"
#include "hsearch/topics.hpp"
#include "hsearch/wordgraph.hpp"

using namespace hsearch;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.uniform();
  return m;
}

Labeling labels(const Mapping& m) { return Labeling(m.begin(), m.end()); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// ---------------------------------------------------------------------------

void random_walk_fixed_point() {
  Rng rng(2024);
  const auto start = Clock::now();
  double worst = 0.0, worst_direct = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rng.below(199);
    SimilarityTable table(n);
    const double density = 0.02 + 0.2 * rng.uniform();
    for (std::uint32_t i = 0; i < n; ++i)
      for (std::uint32_t j = i + 1; j < n; ++j)
        if (rng.uniform() < density) table.set(i, j, rng.uniform());
    const auto R = build_transition(table, 0.3);
    Eigen::VectorXd t(static_cast<Eigen::Index>(n));
    for (auto& v : t) v = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
    const auto it = random_walk(R, t, {0.5, WalkMode::Iterative, 1e-13, 100000});
    const auto cf = random_walk(R, t, {0.5, WalkMode::ClosedForm, 0, 0});
    worst = std::max(worst, (it.scores - cf.scores).lpNorm<1>());
    // Independent dense oracle: s (I − αR) = (1 − α) t.
    const Eigen::MatrixXd A =
        Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) -
        0.5 * Eigen::MatrixXd(R.R);
    const Eigen::VectorXd direct = A.transpose().partialPivLu().solve(0.5 * t);
    worst_direct = std::max(worst_direct, (it.scores - direct).lpNorm<1>());
  }
  const double secs = seconds_since(start);
  report(1, "random-walk fixed point", worst < 1e-8 && worst_direct < 1e-8 && secs < 5.0,
         fmt("100 instances, max L1 iterative-vs-closed %.2e, vs dense solve %.2e, %.2f s", worst,
             worst_direct, secs));
}

void ccbr_monotonicity() {
  Rng rng(77);
  int bad = 0;
  std::size_t steps = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto nh = static_cast<Eigen::Index>(2 + rng.below(49));
    const auto nt = static_cast<Eigen::Index>(2 + rng.below(29));
    const Matrix H = random_matrix(nh, nt, rng);
    const Matrix T = random_matrix(nt, static_cast<Eigen::Index>(5 + rng.below(40)), rng);
    Matrix O = Matrix::Zero(nh, nh);
    for (Eigen::Index i = 0; i < nh; ++i)
      for (Eigen::Index j = i + 1; j < nh; ++j)
        if (rng.uniform() < 0.15) O(i, j) = O(j, i) = static_cast<double>(1 + rng.below(6));
    CoClusterConfig cfg{.row_clusters = 1 + rng.below(static_cast<std::size_t>(std::min<Eigen::Index>(nh, 6))),
                        .col_clusters = 1 + rng.below(static_cast<std::size_t>(std::min<Eigen::Index>(nt, 5))),
                        .lambda_topic = rng.uniform() * 2,
                        .lambda_cooccur = rng.uniform() * 2,
                        .seed = static_cast<std::uint64_t>(rep + 1)};
    const auto res = ccbr_fit(H, T, O, cfg);
    steps += res.objective_trace.size() - 1;
    for (std::size_t k = 1; k < res.objective_trace.size(); ++k)
      if (res.objective_trace[k] > res.objective_trace[k - 1]) ++bad;
  }
  report(2, "CCBR monotonicity", bad == 0,
         fmt("100 instances, %zu accepted iterations, %d increases", steps, bad));
}

bool surjective(const Mapping& m, std::size_t k) {
  std::vector<bool> seen(k, false);
  for (auto c : m) seen[c] = true;
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

void for_each_mapping(std::size_t n, std::size_t k, const std::function<void(const Mapping&)>& fn) {
  Mapping m(n, 0);
  while (true) {
    if (surjective(m, k)) fn(m);
    std::size_t i = 0;
    while (i < n && ++m[i] == k) m[i++] = 0;
    if (i == n) return;
  }
}

void planted_cocluster_recovery() {
  int exact = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto p = generate_block_matrix(30, 20, 3, 4, 0.0, seed);
    CoClusterConfig cfg{.row_clusters = 3, .col_clusters = 4, .lambda_topic = 0, .lambda_cooccur = 0,
                        .seed = seed * 1000};
    const auto r = choose_restart(p.values, Matrix(), Matrix(), cfg, 8);
    if (nmi(labels(r.rho), labels(p.rho)) > 1.0 - 1e-12 &&
        nmi(labels(r.gamma), labels(p.gamma)) > 1.0 - 1e-12)
      ++exact;
  }

  // 6x6 instance with mild noise and both regularizers, brute-forced over every
  // pair of surjective mappings.
  Rng rng(6);
  const auto p = generate_block_matrix(6, 6, 2, 3, 0.05, 6);
  const Matrix T = random_matrix(6, 4, rng);
  Matrix O = Matrix::Zero(6, 6);
  O(0, 1) = O(1, 0) = 2;
  O(2, 4) = O(4, 2) = 1;
  CoClusterConfig cfg{.row_clusters = 2, .col_clusters = 3, .lambda_topic = 0.5, .lambda_cooccur = 0.1};
  double best = std::numeric_limits<double>::infinity();
  for_each_mapping(6, 2, [&](const Mapping& r) {
    for_each_mapping(6, 3, [&](const Mapping& g) { best = std::min(best, objective(p.values, T, O, r, g, cfg)); });
  });
  const double got = choose_restart(p.values, T, O, cfg, 8).objective();
  const bool global = std::abs(got - best) <= 1e-12 * std::max(1.0, best);
  report(3, "planted co-cluster recovery", exact >= 95 && global,
         fmt("NMI=1 on rows and columns in %d/100 seeds; 6x6 best-of-8 %.12f vs brute force %.12f",
             exact, got, best));
}

void bilateral_regularization_effect() {
  // Three planted hashtag groups. H rows carry only a weak group signal under
  // heavy noise; O has dense within-group co-occurrence.
  double with = 0, without = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const int nh = 30, nt = 12, groups = 3;
    Mapping truth(nh);
    for (int h = 0; h < nh; ++h) truth[static_cast<std::size_t>(h)] = static_cast<std::uint32_t>(h % groups);
    rng.shuffle(truth);
    Matrix H(nh, nt);
    for (int h = 0; h < nh; ++h)
      for (int t = 0; t < nt; ++t) {
        const double signal = (t % groups) == static_cast<int>(truth[static_cast<std::size_t>(h)]) ? 0.3 : 0.0;
        H(h, t) = std::max(0.0, signal + 0.35 * rng.normal());
      }
    Matrix O = Matrix::Zero(nh, nh);
    for (int i = 0; i < nh; ++i)
      for (int j = i + 1; j < nh; ++j) {
        const bool same = truth[static_cast<std::size_t>(i)] == truth[static_cast<std::size_t>(j)];
        if (rng.uniform() < (same ? 0.6 : 0.05)) O(i, j) = O(j, i) = static_cast<double>(1 + rng.below(3));
      }
    CoClusterConfig cfg{.row_clusters = 3, .col_clusters = 3, .lambda_topic = 0, .lambda_cooccur = 1,
                        .seed = seed};
    with += nmi(labels(choose_restart(H, Matrix(), O, cfg, 8).rho), labels(truth));
    cfg.lambda_cooccur = 0;
    without += nmi(labels(choose_restart(H, Matrix(), O, cfg, 8).rho), labels(truth));
  }
  with /= 20;
  without /= 20;
  report(4, "bilateral regularization effect", with > without,
         fmt("mean NMI over 20 seeds: lambda_O=1 %.4f, lambda_O=0 %.4f", with, without));
}

void ranking_fixed_point() {
  Rng rng(55);
  double worst = 0;
  int order_changes = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto n = static_cast<Eigen::Index>(1 + rng.below(20));
    Matrix kappa;
    if (n == 1) {
      kappa = Matrix::Ones(1, 1);
    } else {
      Matrix dists(n, 1 + static_cast<Eigen::Index>(rng.below(8)));
      for (Eigen::Index i = 0; i < dists.rows(); ++i)
        for (Eigen::Index j = 0; j < dists.cols(); ++j) dists(i, j) = rng.uniform();
      kappa = semantic_relevance(dists).kappa;
    }
    Eigen::VectorXd U(n);
    for (auto& u : U) u = 100.0 * rng.uniform();
    const auto it = rank_clusters(kappa, U, {0.5, 1e-13, 1000000});
    const auto cf = rank_clusters_closed_form(kappa, U, 0.5);
    worst = std::max(worst, (it.importance - cf).lpNorm<1>());
    auto order = [](const Eigen::VectorXd& v) {
      std::vector<Eigen::Index> idx(static_cast<std::size_t>(v.size()));
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v(a) > v(b); });
      return idx;
    };
    const auto base = order(it.importance);
    for (double scale : {1e-3, 0.5, 7.0, 1e4}) {
      const Eigen::VectorXd scaled = scale * U;
      if (order(rank_clusters(kappa, scaled, {0.5, 1e-13 * scale, 1000000}).importance) != base) ++order_changes;
    }
  }
  report(5, "ranking fixed point", worst < 1e-8 && order_changes == 0,
         fmt("100 instances, max L1 iterative-vs-closed %.2e, %d order changes under U scaling",
             worst, order_changes));
}

void metric_goldens() {
  std::vector<std::string> bad;
  auto check = [&](const char* name, double got, double want, double tol) {
    if (!(std::abs(got - want) <= tol)) bad.push_back(fmt("%s=%.12f (want %.12f)", name, got, want));
  };
  check("nfr([a,b],[b,a])", nfr({"a", "b"}, {"b", "a"}).value, 0.0, 1e-12);
  check("nfr([a,b,c],[a,c,b])", nfr({"a", "b", "c"}, {"a", "c", "b"}).value, 0.5, 1e-12);
  check("nmi(identical)", nmi({0, 0, 1, 1, 2}, {0, 0, 1, 1, 2}), 1.0, 1e-12);
  check("nmi(independent 2x2)", nmi({1, 1, 2, 2}, {1, 2, 1, 2}), 0.0, 1e-12);
  const std::vector<double> r = {0, 1}, ideal = {1, 0};
  check("ndcg((0,1),k=2)", ndcg(r, ideal, 2), std::log(2.0) / std::log(3.0), 1e-9);
  const std::vector<double> x = {1, 2, 3}, y = {1, 3, 2};
  check("pearson((1,2,3),(1,3,2))", pearson(x, y), 0.5, 1e-9);
  std::string detail = bad.empty() ? "nfr 0 / 0.5, nmi 1 / 0, ndcg ln2/ln3, pearson 0.5" : "";
  for (const auto& b : bad) detail += b + "; ";
  report(6, "metric golden values", bad.empty(), detail);
}

struct EndToEnd {
  double nmi = 0;
  bool top_is_largest = false;
  std::string hierarchy;
};

EndToEnd planted_run(std::uint64_t seed, const fs::path& dir) {
  PlantedSpec spec;
  spec.subtopics = 3;
  spec.tags_per_subtopic = 2;
  spec.items_per_tag = 30;
  spec.items_per_tag_step = 6;
  spec.noise = 0.1;
  spec.cooccur_rate = 0.2;
  spec.seed = seed;
  const auto corpus = generate_corpus(spec);
  fs::create_directories(dir);
  {
    std::ofstream jsonl(dir / "corpus.jsonl"), sim(dir / "similarity.tsv"), ini(dir / "config.ini");
    write_jsonl(corpus.collection, jsonl);
    write_planted_similarity(corpus, sim);
    write_planted_config(spec, ini);
  }
  const auto cfg = load_config(dir / "config.ini");
  const auto artifacts = run_pipeline(cfg);
  write_artifacts(artifacts, cfg.output_dir);

  EndToEnd out;
  out.hierarchy = slurp(cfg.output_dir / "hierarchy.json");
  Labeling truth, pred;
  for (const auto& c : artifacts.hierarchy.clusters)
    for (const auto& t : c.hashtags) {
      truth.push_back(corpus.hashtag_labels.at(std::string(to_string(t.source)) + ":" + t.tag));
      pred.push_back(static_cast<int>(c.rank));
    }
  out.nmi = truth.size() == corpus.hashtag_labels.size() ? nmi(truth, pred) : 0.0;

  std::map<int, int> planted_size;
  for (const auto& [id, label] : corpus.item_labels) ++planted_size[label];
  const int largest = std::max_element(planted_size.begin(), planted_size.end(), [](auto& a, auto& b) {
                        return a.second < b.second;
                      })->first;
  std::map<int, int> votes;
  for (const auto& t : artifacts.hierarchy.clusters.front().hashtags)
    ++votes[corpus.hashtag_labels.at(std::string(to_string(t.source)) + ":" + t.tag)];
  const int top_label =
      std::max_element(votes.begin(), votes.end(), [](auto& a, auto& b) { return a.second < b.second; })->first;
  out.top_is_largest = top_label == largest;
  return out;
}

void end_to_end_and_determinism(const fs::path& root) {
  const auto start = Clock::now();
  int good = 0, identical = 0;
  double min_nmi = 1.0;
  std::size_t items = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto a = planted_run(seed, root / ("seed" + std::to_string(seed)));
    if (a.nmi >= 0.8 && a.top_is_largest) ++good;
    min_nmi = std::min(min_nmi, a.nmi);
    const auto b = planted_run(seed, root / ("seed" + std::to_string(seed) + "_again"));
    if (a.hierarchy == b.hierarchy && !a.hierarchy.empty()) ++identical;
  }
  {
    PlantedSpec spec;
    spec.items_per_tag = 30;
    spec.items_per_tag_step = 6;
    items = generate_corpus(spec).collection.size();
  }
  const double secs = seconds_since(start) / 2.0;  // every seed ran twice
  report(7, "end-to-end planted pipeline", good >= 8 && secs < 120.0,
         fmt("%zu items per corpus; NMI>=0.8 with largest subtopic ranked first in %d/10 seeds "
             "(min NMI %.3f); %.1f s for 10 runs",
             items, good, min_nmi, secs));
  report(8, "determinism", identical == 10,
         fmt("byte-identical hierarchy.json in %d/10 repeated runs", identical));
}

void hlda_sanity() {
  PlantedSpec spec;
  spec.subtopics = 3;
  spec.items_per_tag = 30;
  spec.items_per_tag_step = 6;
  spec.noise = 0.0;
  spec.seed = 9;
  const auto corpus = generate_corpus(spec);
  const auto tok = TokenizerConfig::with_default_stopwords(2);
  double worst_nmi = 1.0, worst_sum = 0.0;
  std::string per_source;
  for (Source s : kAllSources) {
    const auto& items = corpus.collection.items(s);
    const auto vocab = build_vocabulary(std::span<const Item>(items), tok);
    HldaConfig cfg;
    cfg.iterations = 200;
    cfg.seed = 9 + static_cast<std::uint64_t>(s);
    const auto m = fit_source_model(corpus.collection, s, vocab, tok, cfg);
    Labeling truth, got;
    for (std::size_t d = 0; d < items.size(); ++d) {
      truth.push_back(corpus.item_labels.at(items[d].id));
      got.push_back(m.leaf_assignment(d));
    }
    const double v = nmi(truth, got);
    worst_nmi = std::min(worst_nmi, v);
    per_source += fmt("%s %.3f (%zu leaves) ", std::string(to_string(s)).c_str(), v, m.num_leaves());
    auto dev = [&](const std::vector<double>& dist) {
      worst_sum = std::max(worst_sum, std::abs(std::accumulate(dist.begin(), dist.end(), 0.0) - 1.0));
    };
    dev(m.root_topic);
    for (const auto& leaf : m.leaf_topics) dev(leaf);
    for (const auto& dt : m.doc_topics)
      if (dt) dev({dt->root, dt->leaf});
    for (const auto& p : extract_hashtag_profiles(corpus.collection))
      if (p.source == s) dev(hashtag_topic_distribution(m, p));
  }
  report(9, "hLDA sanity", worst_nmi >= 0.8 && worst_sum <= 1e-9,
         fmt("leaf NMI %s; max |sum-1| %.1e", per_source.c_str(), worst_sum));
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  const fs::path root = fs::temp_directory_path() / "hsearch_acceptance";
  fs::remove_all(root);
  try {
    random_walk_fixed_point();
    ccbr_monotonicity();
    planted_cocluster_recovery();
    bilateral_regularization_effect();
    ranking_fixed_point();
    metric_goldens();
    end_to_end_and_determinism(root);
    hlda_sanity();
  } catch (const std::exception& e) {
    std::printf("[FAIL] acceptance suite aborted: %s\n", e.what());
    ++failures;
  }
  fs::remove_all(root);
  std::printf("%s: %d criterion failure(s)\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
