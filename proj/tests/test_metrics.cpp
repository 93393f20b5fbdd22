#include <doctest.h>

#include <cmath>
#include <vector>

#include "hsearch/error.hpp"
#include "hsearch/metrics.hpp"
#include "hsearch/random.hpp"

using namespace hsearch;

TEST_CASE("footrule of identical lists") {
  CHECK(nfr({"a", "b", "c", "d"}, {"a", "b", "c", "d"}).value == 1.0);
}

TEST_CASE("footrule of a full reversal") {
  const auto r = nfr({"a", "b"}, {"b", "a"});
  CHECK(r.footrule == 2.0);
  CHECK(r.max_footrule == 2.0);
  CHECK(r.value == 0.0);
}

TEST_CASE("footrule with one swap") {
  const auto r = nfr({"a", "b", "c"}, {"a", "c", "b"});
  CHECK(r.footrule == 2.0);
  CHECK(r.max_footrule == 4.0);
  CHECK(r.value == doctest::Approx(0.5));
}

TEST_CASE("footrule re-ranks on the overlap") {
  // Overlap {a,c}: ranks (1,2) in both lists after dropping the rest.
  const auto r = nfr({"a", "x", "c"}, {"y", "a", "c"});
  CHECK(r.overlap == 2);
  CHECK(r.value == 1.0);
}

TEST_CASE("footrule of tiny overlaps is degenerate") {
  const auto r = nfr({"a", "b"}, {"a", "z"});
  CHECK(r.degenerate);
  CHECK(r.value == 1.0);
  CHECK(nfr({}, {}).degenerate);
}

TEST_CASE("footrule rejects duplicates") {
  CHECK_THROWS_AS(nfr({"a", "a"}, {"a"}), DuplicateElements);
}

TEST_CASE("footrule matches the largest displacement on reversed lists") {
  for (std::size_t n = 2; n < 12; ++n) {
    RankedList a, b;
    for (std::size_t i = 0; i < n; ++i) a.push_back(std::to_string(i));
    b.assign(a.rbegin(), a.rend());
    CHECK(nfr(a, b).value == doctest::Approx(0.0));
  }
}

TEST_CASE("nmi of identical labelings") { CHECK(nmi({0, 0, 1, 1, 2}, {0, 0, 1, 1, 2}) == doctest::Approx(1.0)); }

TEST_CASE("nmi of an independent labeling") {
  CHECK(nmi({1, 1, 2, 2}, {1, 2, 1, 2}) == doctest::Approx(0.0));
}

TEST_CASE("nmi is invariant to label permutation") {
  Rng rng(5);
  Labeling a(40), b(40);
  for (auto& v : a) v = static_cast<int>(rng.below(4));
  for (auto& v : b) v = static_cast<int>(rng.below(3));
  Labeling b2 = b;
  for (auto& v : b2) v = (v + 1) % 3 + 10;
  CHECK(nmi(a, b) == doctest::Approx(nmi(a, b2)));
  CHECK(nmi(a, b) == doctest::Approx(nmi(b, a)));
}

TEST_CASE("nmi matches a direct evaluation") {
  const Labeling a = {0, 0, 0, 1, 1, 1};
  const Labeling b = {0, 0, 1, 1, 1, 1};
  // P(a)=(1/2,1/2), P(b)=(1/3,2/3), joint (0,0)=2/6, (0,1)=1/6, (1,1)=3/6.
  const double ha = std::log(2.0);
  const double hb = -(1.0 / 3) * std::log(1.0 / 3) - (2.0 / 3) * std::log(2.0 / 3);
  const double mi = (2.0 / 6) * std::log((2.0 / 6) / (0.5 / 3)) +
                    (1.0 / 6) * std::log((1.0 / 6) / (0.5 * 2 / 3)) +
                    (3.0 / 6) * std::log((3.0 / 6) / (0.5 * 2 / 3));
  CHECK(nmi(a, b) == doctest::Approx(mi / std::sqrt(ha * hb)).epsilon(1e-12));
}

TEST_CASE("nmi edge cases") {
  CHECK(nmi({1, 1, 1}, {0, 1, 2}) == 0.0);
  CHECK_THROWS_AS(nmi({1}, {1, 2}), DomainMismatch);
  CHECK_THROWS_AS(nmi({}, {}), EmptyList);
}

TEST_CASE("ndcg of ideally ordered relevances") {
  const std::vector<double> r = {1, 1, 0, 0};
  CHECK(ndcg(r, 4) == doctest::Approx(1.0));
}

TEST_CASE("ndcg of a swapped pair") {
  const std::vector<double> r = {0, 1}, ideal = {1, 0};
  CHECK(std::abs(ndcg(r, ideal, 2) - std::log(2.0) / std::log(3.0)) < 1e-12);
  CHECK(std::abs(ndcg(r, 2) - std::log(2.0) / std::log(3.0)) < 1e-12);
}

TEST_CASE("ndcg with graded relevance") {
  const std::vector<double> r = {2, 3, 0};
  const double dcg = 3 / std::log(2.0) + 7 / std::log(3.0);
  const double z = 7 / std::log(2.0) + 3 / std::log(3.0);
  CHECK(ndcg(r, 3) == doctest::Approx(dcg / z).epsilon(1e-12));
  CHECK(ndcg(r, 1) == doctest::Approx(3.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("ndcg degenerate inputs") {
  const std::vector<double> zeros = {0, 0, 0};
  CHECK(ndcg(zeros, 3) == 0.0);
  const std::vector<double> r = {1};
  CHECK_THROWS_AS(ndcg(r, 2), InvalidConfig);
  CHECK_THROWS_AS(ndcg(std::vector<double>{}, 1), EmptyList);
}

TEST_CASE("pearson golden values") {
  const std::vector<double> x = {1, 2, 3, 4};
  std::vector<double> y, z;
  for (double v : x) {
    y.push_back(2 * v + 1);
    z.push_back(-v);
  }
  CHECK(pearson(x, y) == doctest::Approx(1.0));
  CHECK(pearson(x, z) == doctest::Approx(-1.0));
  const std::vector<double> a = {1, 2, 3}, b = {1, 3, 2};
  CHECK(std::abs(pearson(a, b) - 0.5) < 1e-12);
}

TEST_CASE("pearson errors") {
  const std::vector<double> c = {2, 2, 2}, x = {1, 2, 3};
  CHECK_THROWS_AS(pearson(c, x), ZeroVariance);
  CHECK_THROWS_AS(pearson(x, std::vector<double>{1, 2}), DomainMismatch);
}
