#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "hsearch/error.hpp"
#include "hsearch/eval_io.hpp"
#include "hsearch/metrics.hpp"
#include "hsearch/pipeline.hpp"
#include "hsearch/synth.hpp"

namespace fs = std::filesystem;

namespace {

void print_value(double v) { std::printf("%.6f\n", v); }

void write_file(const fs::path& path, const std::string& body) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f << body;
    if (!f) throw hsearch::FileNotFound("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

int run_command(const fs::path& config, const std::optional<fs::path>& out,
                const std::optional<std::uint64_t>& seed, const std::vector<std::string>& sets) {
  hsearch::PipelineConfig cfg;
  try {
    cfg = hsearch::load_config(config, sets);
  } catch (const hsearch::Error& e) {
    throw hsearch::StageError("config", e);
  }
  if (out) cfg.output_dir = *out;
  if (seed) {
    cfg.hlda.seed = *seed;
    cfg.cocluster.seed = *seed;
  }
  const auto artifacts = hsearch::run_pipeline(cfg);
  hsearch::write_artifacts(artifacts, cfg.output_dir);
  std::cout << "wrote " << (cfg.output_dir / "hierarchy.json").string() << " ("
            << artifacts.hierarchy.clusters.size() << " clusters)\n";
  return 0;
}

int synth_command(const hsearch::PlantedSpec& spec, const fs::path& out) {
  const auto corpus = hsearch::generate_corpus(spec);
  fs::create_directories(out);
  std::ostringstream jsonl, sim, tags, items, config;
  hsearch::write_jsonl(corpus.collection, jsonl);
  hsearch::write_planted_similarity(corpus, sim);
  hsearch::write_labels(corpus.hashtag_labels, tags);
  hsearch::write_labels(corpus.item_labels, items);
  write_file(out / "corpus.jsonl", jsonl.str());
  write_file(out / "similarity.tsv", sim.str());
  write_file(out / "truth_hashtags.csv", tags.str());
  write_file(out / "truth_items.csv", items.str());
  hsearch::write_planted_config(spec, config);
  write_file(out / "config.ini", config.str());
  std::cout << "wrote " << corpus.collection.size() << " items and " << corpus.hashtag_labels.size()
            << " hashtag labels to " << out.string() << "\n";
  return 0;
}

int labels_command(const fs::path& hierarchy) {
  std::ifstream in(hierarchy);
  if (!in) throw hsearch::FileNotFound("cannot open " + hierarchy.string());
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw hsearch::ParseError(e.what());
  }
  if (const auto problems = hsearch::validate_hierarchy_json(j); !problems.empty())
    throw hsearch::ParseError(hierarchy.string() + ": " + problems.front());
  std::map<std::string, int> labels;
  for (const auto& c : j["clusters"])
    for (const auto& t : c["hashtags"])
      labels[t["source"].get<std::string>() + ":" + t["tag"].get<std::string>()] =
          c["rank"].get<int>();
  hsearch::write_labels(labels, std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hashtag-centric cross-source search: topic modeling, co-clustering and ranking"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run the full pipeline from a config file");
  fs::path config;
  std::optional<fs::path> out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
  run->add_option("--config", config, "INI configuration file")->required();
  run->add_option("--out", out, "Output directory (overrides [output] dir)");
  run->add_option("--seed", seed, "Seed for topic modeling and co-clustering");
  run->add_option("--set", sets, "Override a key, e.g. --set cocluster.l_row=4");

  auto* eval = app.add_subcommand("eval", "Evaluation metrics");
  eval->require_subcommand(1);
  fs::path truth, pred, list_a, list_b, ranked, xs, ys;
  std::size_t k = 0;
  auto* e_nmi = eval->add_subcommand("nmi", "NMI between two key,label files");
  e_nmi->add_option("--truth", truth)->required();
  e_nmi->add_option("--pred", pred)->required();
  auto* e_nfr = eval->add_subcommand("nfr", "Normalized footrule between two ranked lists");
  e_nfr->add_option("--a", list_a)->required();
  e_nfr->add_option("--b", list_b)->required();
  auto* e_ndcg = eval->add_subcommand("ndcg", "NDCG@k of a relevance list in ranked order");
  e_ndcg->add_option("--ranked", ranked)->required();
  e_ndcg->add_option("--k", k)->required();
  auto* e_pearson = eval->add_subcommand("pearson", "Pearson correlation of two number lists");
  e_pearson->add_option("--x", xs)->required();
  e_pearson->add_option("--y", ys)->required();

  auto* synth = app.add_subcommand("synth", "Generate a planted-subtopic corpus");
  hsearch::PlantedSpec spec;
  spec.noise = 0.1;
  spec.cooccur_rate = 0.2;
  spec.items_per_tag_step = 4;
  fs::path synth_out;
  synth->add_option("--subtopics", spec.subtopics)->capture_default_str();
  synth->add_option("--tags", spec.tags_per_subtopic, "Tags per subtopic per source")->capture_default_str();
  synth->add_option("--items", spec.items_per_tag, "Items per tag")->capture_default_str();
  synth->add_option("--items-step", spec.items_per_tag_step, "Extra items per tag for each later subtopic")
      ->capture_default_str();
  synth->add_option("--noise", spec.noise)->capture_default_str();
  synth->add_option("--cooccur", spec.cooccur_rate)->capture_default_str();
  synth->add_option("--seed", spec.seed)->capture_default_str();
  synth->add_option("--out", synth_out)->required();

  auto* labels = app.add_subcommand("labels", "Print key,rank labels from a hierarchy.json");
  fs::path hierarchy;
  labels->add_option("--hierarchy", hierarchy)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_command(config, out, seed, sets);
    if (*synth) return synth_command(spec, synth_out);
    if (*labels) return labels_command(hierarchy);
    if (*e_nmi) {
      const auto aligned = hsearch::read_aligned_labels(truth, pred);
      print_value(hsearch::nmi(aligned.truth, aligned.predicted));
    } else if (*e_nfr) {
      print_value(hsearch::nfr(hsearch::read_ranked_list(list_a), hsearch::read_ranked_list(list_b)).value);
    } else if (*e_ndcg) {
      print_value(hsearch::ndcg(hsearch::read_numbers(ranked), k));
    } else if (*e_pearson) {
      print_value(hsearch::pearson(hsearch::read_numbers(xs), hsearch::read_numbers(ys)));
    }
    return 0;
  } catch (const hsearch::StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const hsearch::Error& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
