#include <doctest.h>

#include <algorithm>
#include <limits>
#include <map>

#include "hsearch/cocluster.hpp"
#include "hsearch/error.hpp"
#include "hsearch/metrics.hpp"
#include "hsearch/random.hpp"
#include "hsearch/synth.hpp"

using namespace hsearch;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.uniform();
  return m;
}

Matrix random_cooccurrence(Eigen::Index n, Rng& rng) {
  Matrix o = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (rng.uniform() < 0.2) o(i, j) = o(j, i) = static_cast<double>(1 + rng.below(5));
  return o;
}

Labeling to_labels(const Mapping& m) { return Labeling(m.begin(), m.end()); }

// Objective written out entry by entry, independent of the library helpers.
// T and O are either both present or both empty.
double brute_objective(const Matrix& H, const Matrix& T, const Matrix& O, const Mapping& rho,
                       const Mapping& gamma, double lt, double lo) {
  const auto nh = static_cast<std::size_t>(H.rows()), nt = static_cast<std::size_t>(H.cols());
  auto block_mean = [](const Matrix& X, const Mapping& rm, std::size_t a, const Mapping& cm,
                       std::size_t b) {
    double s = 0, n = 0;
    for (std::size_t i = 0; i < rm.size(); ++i)
      for (std::size_t j = 0; j < cm.size(); ++j)
        if (rm[i] == a && cm[j] == b) {
          s += X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
          ++n;
        }
    return n > 0 ? s / n : X.mean();
  };
  double h = 0;
  for (std::size_t i = 0; i < nh; ++i)
    for (std::size_t j = 0; j < nt; ++j) {
      const double d = H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                       block_mean(H, rho, rho[i], gamma, gamma[j]);
      h += d * d;
    }
  double value = h / static_cast<double>(nh * nt);
  if (T.size() == 0 && O.size() == 0) return value;
  double t = 0;
  for (std::size_t i = 0; i < nt; ++i)
    for (Eigen::Index w = 0; w < T.cols(); ++w) {
      double s = 0, n = 0;
      for (std::size_t k = 0; k < nt; ++k)
        if (gamma[k] == gamma[i]) {
          s += T(static_cast<Eigen::Index>(k), w);
          ++n;
        }
      const double d = T(static_cast<Eigen::Index>(i), w) - s / n;
      t += d * d;
    }
  double o = 0;
  for (std::size_t i = 0; i < nh; ++i)
    for (std::size_t j = 0; j < nh; ++j) {
      const double d = O(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                       block_mean(O, rho, rho[i], rho, rho[j]);
      o += d * d;
    }
  return value + lt * t / static_cast<double>(T.size()) + lo * o / static_cast<double>(nh * nh);
}

bool is_surjective(const Mapping& m, std::size_t k) {
  std::vector<bool> seen(k, false);
  for (auto c : m) seen[c] = true;
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

// Enumerates every mapping of n elements onto k clusters (base-k counter).
template <typename Fn>
void for_each_mapping(std::size_t n, std::size_t k, Fn fn) {
  Mapping m(n, 0);
  while (true) {
    if (is_surjective(m, k)) fn(m);
    std::size_t i = 0;
    while (i < n && ++m[i] == k) m[i++] = 0;
    if (i == n) return;
  }
}

}  // namespace

TEST_CASE("block approximation examples") {
  Matrix H(2, 2);
  H << 1, 2, 3, 4;
  Matrix expect(2, 2);
  expect << 1.5, 1.5, 3.5, 3.5;
  CHECK(mbi_approximation(H, {0, 1}, 2, {0, 0}, 1).isApprox(expect));
  CHECK(mbi_approximation(H, {0, 0}, 1, {0, 0}, 1).isApprox(Matrix::Constant(2, 2, 2.5)));
}

TEST_CASE("block-constant matrices are reproduced") {
  const auto p = generate_block_matrix(12, 9, 3, 3, 0.0, 5);
  CHECK(mbi_approximation(p.values, p.rho, 3, p.gamma, 3).isApprox(p.values));
}

TEST_CASE("empty blocks take the global mean") {
  Matrix H(2, 2);
  H << 1, 2, 3, 6;
  const Matrix approx = mbi_approximation(H, {0, 0}, 2, {0, 1}, 2);
  CHECK(approx(0, 0) == doctest::Approx(2.0));
  CHECK(approx(0, 1) == doctest::Approx(4.0));
}

TEST_CASE("objective is zero for perfect blocks") {
  const auto p = generate_block_matrix(8, 6, 2, 3, 0.0, 1);
  Matrix T(6, 4);
  for (Eigen::Index t = 0; t < 6; ++t) T.row(t) = Eigen::RowVectorXd::Constant(4, 0.1 * (p.gamma[t] + 1));
  Matrix O(8, 8);
  for (Eigen::Index i = 0; i < 8; ++i)
    for (Eigen::Index j = 0; j < 8; ++j) O(i, j) = p.rho[i] == p.rho[j] ? 3.0 : 1.0;
  CoClusterConfig cfg{.row_clusters = 2, .col_clusters = 3};
  CHECK(objective(p.values, T, O, p.rho, p.gamma, cfg) == doctest::Approx(0.0));
}

TEST_CASE("unregularized objective is the plain co-clustering error") {
  Rng rng(3);
  const Matrix H = random_matrix(7, 5, rng), T = random_matrix(5, 9, rng);
  const Matrix O = random_cooccurrence(7, rng);
  const Mapping rho = {0, 1, 2, 0, 1, 2, 0}, gamma = {0, 1, 0, 1, 1};
  CoClusterConfig cfg{.row_clusters = 3, .col_clusters = 2, .lambda_topic = 0, .lambda_cooccur = 0};
  const double plain = (H - mbi_approximation(H, rho, 3, gamma, 2)).squaredNorm() / 35.0;
  CHECK(objective(H, T, O, rho, gamma, cfg) == doctest::Approx(plain).epsilon(1e-12));
}

TEST_CASE("objective matches an entrywise recomputation") {
  Rng rng(21);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix H = random_matrix(4, 4, rng), T = random_matrix(4, 6, rng);
    const Matrix O = random_cooccurrence(4, rng);
    Mapping rho(4), gamma(4);
    for (auto& r : rho) r = static_cast<std::uint32_t>(rng.below(2));
    for (auto& g : gamma) g = static_cast<std::uint32_t>(rng.below(2));
    CoClusterConfig cfg{.row_clusters = 2, .col_clusters = 2, .lambda_topic = 0.7, .lambda_cooccur = 1.3};
    CHECK(objective(H, T, O, rho, gamma, cfg) ==
          doctest::Approx(brute_objective(H, T, O, rho, gamma, 0.7, 1.3)).epsilon(1e-12));
  }
}

TEST_CASE("objective is invariant to relabeling clusters") {
  Rng rng(8);
  const Matrix H = random_matrix(9, 6, rng), T = random_matrix(6, 5, rng);
  const Matrix O = random_cooccurrence(9, rng);
  const Mapping rho = {0, 1, 2, 0, 1, 2, 0, 1, 2}, gamma = {0, 1, 0, 1, 0, 1};
  Mapping rho2 = rho, gamma2 = gamma;
  for (auto& r : rho2) r = (r + 1) % 3;
  for (auto& g : gamma2) g = 1 - g;
  CoClusterConfig cfg{.row_clusters = 3, .col_clusters = 2};
  CHECK(objective(H, T, O, rho, gamma, cfg) == doctest::Approx(objective(H, T, O, rho2, gamma2, cfg)));
}

TEST_CASE("row step reduces to k-means assignment") {
  Rng rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix H = random_matrix(15, 4, rng);
    Mapping rho(15);
    for (std::size_t i = 0; i < 15; ++i) rho[i] = static_cast<std::uint32_t>(i % 3);
    rng.shuffle(rho);
    const Mapping gamma = {0, 1, 2, 3};
    CoClusterConfig cfg{.row_clusters = 3, .col_clusters = 4, .lambda_topic = 0, .lambda_cooccur = 0};
    Matrix centroids = Matrix::Zero(3, 4);
    std::vector<double> counts(3, 0);
    for (Eigen::Index i = 0; i < 15; ++i) {
      centroids.row(rho[i]) += H.row(i);
      ++counts[rho[i]];
    }
    for (int c = 0; c < 3; ++c) centroids.row(c) /= counts[c];
    Mapping expect(15);
    for (Eigen::Index i = 0; i < 15; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::uint32_t c = 0; c < 3; ++c) {
        const double d = (H.row(i) - centroids.row(c)).squaredNorm();
        if (d < best - 1e-15) {
          best = d;
          expect[i] = c;
        }
      }
    }
    CHECK(reassign_rows(H, Matrix(), rho, gamma, cfg) == expect);
  }
}

TEST_CASE("objective trace never increases") {
  Rng rng(99);
  for (int rep = 0; rep < 30; ++rep) {
    const auto nh = static_cast<Eigen::Index>(5 + rng.below(30));
    const auto nt = static_cast<Eigen::Index>(3 + rng.below(20));
    const Matrix H = random_matrix(nh, nt, rng), T = random_matrix(nt, 8, rng);
    const Matrix O = random_cooccurrence(nh, rng);
    CoClusterConfig cfg{.row_clusters = 1 + rng.below(4), .col_clusters = 1 + rng.below(3),
                        .seed = static_cast<std::uint64_t>(rep)};
    const auto res = ccbr_fit(H, T, O, cfg);
    for (std::size_t k = 1; k < res.objective_trace.size(); ++k)
      CHECK(res.objective_trace[k] <= res.objective_trace[k - 1]);
    CHECK(res.objective() == doctest::Approx(objective(H, T, O, res.rho, res.gamma, cfg)));
    CHECK(is_surjective(res.rho, cfg.row_clusters));
    CHECK(is_surjective(res.gamma, cfg.col_clusters));
  }
}

TEST_CASE("hashtag weights sum to one per cluster") {
  Rng rng(6);
  const Matrix H = random_matrix(12, 6, rng);
  std::vector<double> mass(12);
  for (auto& m : mass) m = static_cast<double>(1 + rng.below(9));
  CoClusterConfig cfg{.row_clusters = 3, .col_clusters = 2};
  const auto res = ccbr_fit(H, Matrix(), Matrix(), cfg, mass);
  std::map<std::uint32_t, double> total;
  for (std::size_t h = 0; h < 12; ++h) total[res.rho[h]] += res.hashtag_weights[h];
  for (const auto& [c, w] : total) CHECK(std::abs(w - 1.0) < 1e-9);
  // Proportional to mass within a cluster.
  for (std::size_t a = 0; a < 12; ++a)
    for (std::size_t b = 0; b < 12; ++b)
      if (res.rho[a] == res.rho[b])
        CHECK(res.hashtag_weights[a] * mass[b] == doctest::Approx(res.hashtag_weights[b] * mass[a]));
}

TEST_CASE("restarts reach the brute-force optimum on a small instance") {
  // 6x6 matrix with a planted 2x2 block structure of 0/1 values.
  const Mapping rho_true = {0, 0, 1, 1, 1, 0}, gamma_true = {1, 0, 0, 1, 0, 1};
  Matrix H(6, 6);
  for (Eigen::Index i = 0; i < 6; ++i)
    for (Eigen::Index j = 0; j < 6; ++j) H(i, j) = rho_true[i] == gamma_true[j] ? 1.0 : 0.0;
  CoClusterConfig cfg{.row_clusters = 2, .col_clusters = 2, .lambda_topic = 0, .lambda_cooccur = 0};
  double best = std::numeric_limits<double>::infinity();
  for_each_mapping(6, 2, [&](const Mapping& r) {
    for_each_mapping(6, 2, [&](const Mapping& g) {
      best = std::min(best, brute_objective(H, Matrix(), Matrix(), r, g, 0, 0));
    });
  });
  CHECK(best == 0.0);
  const auto res = choose_restart(H, Matrix(), Matrix(), cfg, 16);
  CHECK(res.objective() == doctest::Approx(best));
  CHECK(nmi(to_labels(res.rho), to_labels(rho_true)) == doctest::Approx(1.0));
  CHECK(nmi(to_labels(res.gamma), to_labels(gamma_true)) == doctest::Approx(1.0));
}

TEST_CASE("co-occurring hashtags join one cluster") {
  // Rows 0 and 3 sit halfway between two planted groups; they co-occur 10 times.
  Matrix H(6, 2);
  H << 0.5, 0.5, 1, 0, 1, 0, 0.5, 0.5, 0, 1, 0, 1;
  Matrix O = Matrix::Zero(6, 6);
  O(0, 3) = O(3, 0) = 10;
  CoClusterConfig cfg{.row_clusters = 2, .col_clusters = 2, .lambda_topic = 0, .lambda_cooccur = 1};
  const Mapping gamma = {0, 1};
  const double together = objective(H, Matrix(), O, {0, 0, 0, 0, 1, 1}, gamma, cfg);
  const double apart = objective(H, Matrix(), O, {0, 0, 0, 1, 1, 1}, gamma, cfg);
  CHECK(together < apart);
  const auto res = choose_restart(H, Matrix(), O, cfg, 8);
  CHECK(res.rho[0] == res.rho[3]);
}

TEST_CASE("a single restart equals a plain fit") {
  Rng rng(4);
  const Matrix H = random_matrix(10, 6, rng), T = random_matrix(6, 5, rng);
  const Matrix O = random_cooccurrence(10, rng);
  CoClusterConfig cfg{.row_clusters = 3, .col_clusters = 2, .seed = 42};
  const auto a = choose_restart(H, T, O, cfg, 1);
  const auto b = ccbr_fit(H, T, O, cfg);
  CHECK(a.rho == b.rho);
  CHECK(a.gamma == b.gamma);
  CHECK(a.objective_trace == b.objective_trace);
  CHECK(choose_restart(H, T, O, cfg, 8).objective() <= a.objective());
}

TEST_CASE("more restarts recover noisy planted rows at least as well") {
  double nmi1 = 0, nmi8 = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto p = generate_block_matrix(24, 12, 3, 3, 0.15, seed);
    CoClusterConfig cfg{.row_clusters = 3, .col_clusters = 3, .seed = seed * 100};
    const auto one = choose_restart(p.values, Matrix(), Matrix(), cfg, 1);
    const auto eight = choose_restart(p.values, Matrix(), Matrix(), cfg, 8);
    CHECK(eight.objective() <= one.objective());
    nmi1 += nmi(to_labels(one.rho), to_labels(p.rho));
    nmi8 += nmi(to_labels(eight.rho), to_labels(p.rho));
  }
  CHECK(nmi8 >= nmi1);
}

TEST_CASE("fit is deterministic for a seed") {
  Rng rng(10);
  const Matrix H = random_matrix(20, 8, rng);
  CoClusterConfig cfg{.row_clusters = 4, .col_clusters = 3, .seed = 5};
  const auto a = ccbr_fit(H, Matrix(), Matrix(), cfg);
  const auto b = ccbr_fit(H, Matrix(), Matrix(), cfg);
  CHECK(a.rho == b.rho);
  CHECK(a.objective_trace == b.objective_trace);
}

TEST_CASE("tolerance zero stops at a fixed point") {
  Rng rng(12);
  const Matrix H = random_matrix(20, 8, rng);
  CoClusterConfig cfg{.row_clusters = 3, .col_clusters = 3, .max_iter = 1000, .tol = 0};
  const auto res = ccbr_fit(H, Matrix(), Matrix(), cfg);
  CHECK(res.iterations < cfg.max_iter);
  const auto again = ccbr_fit_from(H, Matrix(), Matrix(), cfg, res.rho, res.gamma);
  CHECK(again.rho == res.rho);
  CHECK(again.gamma == res.gamma);
  CHECK(again.iterations == 0);
}

TEST_CASE("infeasible cluster counts") {
  const Matrix H = Matrix::Ones(3, 2);
  CHECK_THROWS_AS(ccbr_fit(H, Matrix(), Matrix(), {.row_clusters = 4, .col_clusters = 1}), InfeasibleConfig);
  CHECK_THROWS_AS(ccbr_fit(H, Matrix(), Matrix(), {.row_clusters = 1, .col_clusters = 3}), InfeasibleConfig);
  CHECK_THROWS_AS(ccbr_fit(H, Matrix(), Matrix(), {.row_clusters = 0, .col_clusters = 1}), InfeasibleConfig);
  CHECK_THROWS_AS(choose_restart(H, Matrix(), Matrix(), {.row_clusters = 1, .col_clusters = 1}, 0),
                  InfeasibleConfig);
}
