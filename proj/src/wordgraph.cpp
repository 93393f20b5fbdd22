#include "hsearch/wordgraph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "hsearch/error.hpp"

namespace hsearch {

void SimilarityTable::set(std::uint32_t i, std::uint32_t j, double sim) {
  if (i == j) return;
  auto key = std::minmax(i, j);
  auto [it, inserted] = pairs_.try_emplace({key.first, key.second}, sim);
  if (!inserted) it->second = std::max(it->second, sim);
}

double SimilarityTable::get(std::uint32_t i, std::uint32_t j) const {
  if (i == j) return 1.0;
  auto key = std::minmax(i, j);
  auto it = pairs_.find({key.first, key.second});
  return it == pairs_.end() ? 0.0 : it->second;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

SimilarityTable parse_similarity(std::istream& in, const Vocabulary& vocab) {
  SimilarityTable table(vocab.size());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      auto tab = view.find('\t', start);
      fields.push_back(trim(view.substr(start, tab == std::string_view::npos ? tab : tab - start)));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    auto fail = [&](const std::string& why) {
      throw ParseError("similarity table line " + std::to_string(lineno) + ": " + why);
    };
    if (fields.size() != 3) fail("expected 3 tab-separated fields");
    double sim = 0.0;
    auto [ptr, ec] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), sim);
    if (ec != std::errc() || ptr != fields[2].data() + fields[2].size())
      fail("bad similarity value '" + std::string(fields[2]) + "'");
    if (!(sim >= 0.0 && sim <= 1.0)) fail("similarity " + std::string(fields[2]) + " outside [0,1]");
    auto a = vocab.index(fields[0]);
    auto b = vocab.index(fields[1]);
    if (!a || !b) continue;
    table.set(*a, *b, sim);
  }
  return table;
}

SimilarityTable load_similarity(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw FileNotFound("cannot open similarity table " + path.string());
  return parse_similarity(in, vocab);
}

TransitionMatrix build_transition(const SimilarityTable& table, double threshold) {
  if (!(threshold >= 0.0 && threshold < 1.0))
    throw InvalidConfig("similarity threshold must lie in [0,1)");
  const auto n = static_cast<Eigen::Index>(table.vocab_size());
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(n) + 2 * table.pairs().size());
  for (Eigen::Index i = 0; i < n; ++i) entries.emplace_back(i, i, 1.0);
  for (const auto& [key, sim] : table.pairs()) {
    if (sim < threshold || sim <= 0.0) continue;
    entries.emplace_back(key.first, key.second, sim);
    entries.emplace_back(key.second, key.first, sim);
  }
  TransitionMatrix out;
  out.R.resize(n, n);
  out.R.setFromTriplets(entries.begin(), entries.end());
  out.isolated.assign(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (decltype(out.R)::InnerIterator it(out.R, i); it; ++it) sum += it.value();
    if (sum <= 0.0) {
      out.isolated[static_cast<std::size_t>(i)] = true;
      continue;
    }
    for (decltype(out.R)::InnerIterator it(out.R, i); it; ++it) it.valueRef() /= sum;
  }
  return out;
}

WalkResult random_walk(const TransitionMatrix& R, const Eigen::VectorXd& t,
                       const WalkOptions& opt) {
  if (!(opt.alpha > 0.0 && opt.alpha < 1.0)) throw InvalidConfig("walk alpha must lie in (0,1)");
  if (t.size() != R.size()) throw InvalidConfig("score vector does not match transition matrix");
  if ((t.array() < 0.0).any()) throw InvalidConfig("initial scores must be non-negative");

  WalkResult res;
  if (opt.mode == WalkMode::ClosedForm) {
    res.scores = ClosedFormWalker(R, opt.alpha).solve(t);
    return res;
  }
  const Eigen::VectorXd restart = (1.0 - opt.alpha) * t;
  Eigen::VectorXd s = t;
  for (std::size_t l = 1; l <= opt.max_iter; ++l) {
    // row-vector propagation s R, written as R^T s
    Eigen::VectorXd next = opt.alpha * (R.R.transpose() * s) + restart;
    const double delta = (next - s).lpNorm<1>();
    s.swap(next);
    if (delta < opt.tol) {
      res.scores = std::move(s);
      res.iterations = l;
      return res;
    }
  }
  throw NonConvergence("random walk did not converge in " + std::to_string(opt.max_iter) +
                       " iterations");
}

ClosedFormWalker::ClosedFormWalker(const TransitionMatrix& R, double alpha) : alpha_(alpha) {
  const auto n = R.size();
  Eigen::SparseMatrix<double> I(n, n);
  I.setIdentity();
  Eigen::SparseMatrix<double> A = I - alpha * Eigen::SparseMatrix<double>(R.R.transpose());
  A.makeCompressed();
  lu_.compute(A);
  // (I − αR) is strictly diagonally dominant for α < 1 and row-(sub)stochastic R.
  if (lu_.info() != Eigen::Success) throw SingularSystem("cannot factor I - alpha R");
}

Eigen::VectorXd ClosedFormWalker::solve(const Eigen::VectorXd& t) const {
  Eigen::VectorXd s = lu_.solve((1.0 - alpha_) * t);
  if (lu_.info() != Eigen::Success) throw SingularSystem("solve of I - alpha R failed");
  return s;
}

Eigen::MatrixXd UnifiedTopicSpace::as_matrix() const {
  if (topics.empty()) return {};
  Eigen::MatrixXd M(static_cast<Eigen::Index>(topics.size()), topics.front().words.size());
  for (std::size_t k = 0; k < topics.size(); ++k)
    M.row(static_cast<Eigen::Index>(k)) = topics[k].words.transpose();
  return M;
}

UnifiedTopicSpace unify_topics(std::span<const SourceTopics> models, const Vocabulary& vocab_all,
                               const TransitionMatrix& R, const WalkOptions& opt) {
  if (R.size() != static_cast<Eigen::Index>(vocab_all.size()))
    throw InvalidConfig("transition matrix does not match the unified vocabulary");
  std::optional<ClosedFormWalker> walker;
  if (opt.mode == WalkMode::ClosedForm) walker.emplace(R, opt.alpha);

  UnifiedTopicSpace space;
  for (const SourceTopics& st : models) {
    std::vector<Eigen::Index> to_all(st.vocab->size());
    for (std::size_t w = 0; w < st.vocab->size(); ++w) {
      auto idx = vocab_all.index(st.vocab->word(w));
      if (!idx) throw InvalidConfig("word '" + st.vocab->word(w) + "' missing from unified vocabulary");
      to_all[w] = *idx;
    }
    for (std::size_t k = 0; k < st.model->num_leaves(); ++k) {
      Eigen::VectorXd t = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vocab_all.size()));
      const auto& leaf = st.model->leaf_topics[k];
      for (std::size_t w = 0; w < leaf.size(); ++w) t[to_all[w]] = leaf[w];
      Eigen::VectorXd s = walker ? walker->solve(t) : random_walk(R, t, opt).scores;
      s = s.cwiseMax(0.0);
      const double total = s.sum();
      if (total > 0.0) s /= total;
      space.topics.push_back(UnifiedTopic{st.model->source, k, std::move(s)});
    }
  }
  return space;
}

void dump_unified_topics(const UnifiedTopicSpace& space, const Vocabulary& vocab_all,
                         std::size_t top_n, std::ostream& out) {
  for (std::size_t k = 0; k < space.size(); ++k) {
    const auto& topic = space.topics[k];
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(topic.words.size()));
    std::iota(idx.begin(), idx.end(), 0);
    const std::size_t n = std::min(top_n, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n), idx.end(),
                      [&](Eigen::Index a, Eigen::Index b) {
                        return topic.words[a] > topic.words[b] || (topic.words[a] == topic.words[b] && a < b);
                      });
    out << "topic " << k << " (" << to_string(topic.source) << " leaf " << topic.leaf << "):";
    for (std::size_t i = 0; i < n; ++i)
      out << ' ' << vocab_all.word(static_cast<std::size_t>(idx[i])) << '=' << std::setprecision(4)
          << topic.words[idx[i]];
    out << '\n';
  }
}

}  // namespace hsearch
