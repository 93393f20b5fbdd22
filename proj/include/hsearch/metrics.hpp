#pragma once

#include <span>
#include <string>
#include <vector>

namespace hsearch {

using RankedList = std::vector<std::string>;
// Cluster label per element; element i of one labeling corresponds to
// element i of the other.
using Labeling = std::vector<int>;

struct NfrResult {
  double value = 1.0;
  std::size_t overlap = 0;
  double footrule = 0.0;
  double max_footrule = 0.0;
  bool degenerate = false;  // |S| <= 1, value fixed at 1
};

// Normalized Spearman footrule over the elements both lists share, re-ranked
// 1..|S| within the overlap. Throws DuplicateElements.
NfrResult nfr(const RankedList& a, const RankedList& b);

// Normalized mutual information, natural log, H = −Σ P log P. Returns 0 with a
// warning when either labeling has a single cluster. Throws DomainMismatch
// when the labelings differ in length.
double nmi(const Labeling& c1, const Labeling& c2);

// NDCG@k with gains 2^r − 1 and discount 1/ln(1 + j). Z = 0 gives 0 with a
// warning. Throws EmptyList, InvalidConfig for k out of range.
double ndcg(std::span<const double> relevance_in_rank_order,
            std::span<const double> ideal_relevance, std::size_t k);
// Ideal ordering taken as the relevances sorted descending.
double ndcg(std::span<const double> relevance_in_rank_order, std::size_t k);

// Sample Pearson correlation. Throws DomainMismatch, ZeroVariance.
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace hsearch
