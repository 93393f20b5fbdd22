#include "hsearch/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "hsearch/error.hpp"

namespace hsearch {

namespace {

void require_unique(const RankedList& list) {
  std::unordered_set<std::string> seen;
  for (const auto& e : list)
    if (!seen.insert(e).second) throw DuplicateElements("element '" + e + "' appears twice");
}

}  // namespace

NfrResult nfr(const RankedList& a, const RankedList& b) {
  require_unique(a);
  require_unique(b);
  std::unordered_set<std::string> in_b(b.begin(), b.end());
  std::unordered_map<std::string, long> rank_a;
  for (const auto& e : a)
    if (in_b.contains(e)) rank_a.emplace(e, static_cast<long>(rank_a.size()) + 1);

  NfrResult res;
  res.overlap = rank_a.size();
  long r = 0;
  for (const auto& e : b) {
    auto f = rank_a.find(e);
    if (f == rank_a.end()) continue;
    ++r;
    res.footrule += static_cast<double>(std::labs(f->second - r));
  }
  const auto s = static_cast<double>(res.overlap);
  res.max_footrule = res.overlap % 2 == 0 ? 0.5 * s * s : 0.5 * (s + 1) * (s - 1);
  if (res.overlap <= 1) {
    res.degenerate = true;
    res.value = 1.0;
    return res;
  }
  res.value = 1.0 - res.footrule / res.max_footrule;
  return res;
}

double nmi(const Labeling& c1, const Labeling& c2) {
  if (c1.size() != c2.size()) throw DomainMismatch("labelings cover different element counts");
  if (c1.empty()) throw EmptyList("labelings are empty");
  const auto n = static_cast<double>(c1.size());
  std::map<int, double> p1, p2;
  std::map<std::pair<int, int>, double> joint;
  for (std::size_t i = 0; i < c1.size(); ++i) {
    p1[c1[i]] += 1.0;
    p2[c2[i]] += 1.0;
    joint[{c1[i], c2[i]}] += 1.0;
  }
  auto entropy = [n](const std::map<int, double>& counts) {
    double h = 0.0;
    for (const auto& [_, c] : counts) {
      const double p = c / n;
      h -= p * std::log(p);
    }
    return h;
  };
  const double h1 = entropy(p1), h2 = entropy(p2);
  if (!(h1 > 0.0) || !(h2 > 0.0)) {
    spdlog::warn("nmi: a labeling has a single cluster (zero entropy); returning 0");
    return 0.0;
  }
  double mi = 0.0;
  for (const auto& [key, c] : joint) {
    const double pij = c / n;
    mi += pij * std::log(pij / ((p1[key.first] / n) * (p2[key.second] / n)));
  }
  return std::clamp(mi / std::sqrt(h1 * h2), 0.0, 1.0);
}

double ndcg(std::span<const double> ranked, std::span<const double> ideal, std::size_t k) {
  if (ranked.empty()) throw EmptyList("relevance list is empty");
  if (k < 1 || k > ranked.size() || k > ideal.size())
    throw InvalidConfig("k must lie in [1, list length]");
  auto dcg = [k](std::span<const double> rel) {
    double sum = 0.0;
    for (std::size_t j = 1; j <= k; ++j) {
      if (rel[j - 1] < 0) throw InvalidConfig("relevances must be non-negative");
      sum += (std::exp2(rel[j - 1]) - 1.0) / std::log(1.0 + static_cast<double>(j));
    }
    return sum;
  };
  const double d = dcg(ranked);
  const double z = dcg(ideal);
  if (!(z > 0.0)) {
    spdlog::warn("ndcg: ideal DCG is zero; returning 0");
    return 0.0;
  }
  return d / z;
}

double ndcg(std::span<const double> ranked, std::size_t k) {
  std::vector<double> ideal(ranked.begin(), ranked.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  return ndcg(ranked, ideal, k);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainMismatch("pearson inputs differ in length");
  if (x.size() < 2) throw DomainMismatch("pearson needs at least 2 observations");
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw ZeroVariance("pearson input has zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace hsearch
