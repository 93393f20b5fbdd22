#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsearch/cocluster.hpp"
#include "hsearch/ranking.hpp"
#include "hsearch/topics.hpp"
#include "hsearch/wordgraph.hpp"

namespace hsearch {

struct PipelineConfig {
  std::filesystem::path input;
  std::filesystem::path similarity;
  std::filesystem::path output_dir = "out";
  std::string query;  // defaults to the corpus file stem

  std::optional<std::filesystem::path> stopwords;  // default: built-in English list
  std::size_t min_freq = 2;

  HldaConfig hlda;

  double walk_alpha = 0.5;
  double walk_threshold = 0.3;
  double walk_tol = 1e-12;
  std::size_t walk_max_iter = 10000;
  WalkMode walk_mode = WalkMode::ClosedForm;

  CoClusterConfig cocluster{.row_clusters = 0};  // row_clusters is required
  std::size_t restarts = 8;

  RankOptions ranking;
  std::size_t description_words = 8;

  // Keys are "section.key"; values as they would appear in the file.
  void set(const std::string& key, const std::string& value);
  void validate() const;  // throws InvalidConfig
};

// INI file: [input] corpus, similarity, query; [output] dir; [tokenizer]
// min_freq, stopwords; [hlda] alpha, gamma, eta, iterations, seed; [walk]
// alpha, threshold, tol, max_iter, mode; [cocluster] l_row, l_col, lambda_t,
// lambda_o, restarts, seed, max_iter, tol; [ranking] psi, description_words,
// tol, max_iter. Relative paths resolve against the file's directory.
// `overrides` are "section.key=value" strings applied after the file.
PipelineConfig load_config(const std::filesystem::path& path,
                           const std::vector<std::string>& overrides = {});

struct RunArtifacts {
  Hierarchy hierarchy;
  nlohmann::ordered_json hierarchy_json;
  std::string report_html;
  nlohmann::ordered_json run_log;
};

// Runs corpus -> topics -> wordgraph -> cocluster -> ranking. Failures are
// rethrown as StageError naming the stage.
RunArtifacts run_pipeline(const PipelineConfig& cfg);

// Writes hierarchy.json, report.html and run_log.json into `dir`. Every file
// goes to a temporary name first; all are renamed only after all writes
// succeed.
void write_artifacts(const RunArtifacts& artifacts, const std::filesystem::path& dir);

nlohmann::ordered_json hierarchy_to_json(const Hierarchy& h);
std::string render_report(const nlohmann::ordered_json& hierarchy_json);
// Structural check against docs/hierarchy.schema.json; returns the problems found.
std::vector<std::string> validate_hierarchy_json(const nlohmann::ordered_json& j);

}  // namespace hsearch
