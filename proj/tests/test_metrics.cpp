#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "sofanet/errors.hpp"
#include "sofanet/metrics.hpp"

using namespace sofanet;

namespace {

// Pairwise concordance count, the textbook definition.
double auroc_oracle(const ScoredSet& s) {
  double num = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < s.scores.size(); ++i) {
    if (!s.labels[i]) continue;
    for (std::size_t j = 0; j < s.scores.size(); ++j) {
      if (s.labels[j]) continue;
      ++pairs;
      if (s.scores[i] > s.scores[j])
        num += 1.0;
      else if (s.scores[i] == s.scores[j])
        num += 0.5;
    }
  }
  return num / static_cast<double>(pairs);
}

// Selection-sort the indices (score desc, index asc), then recompute
// precision at every positive rank from scratch.
double auprc_oracle(const ScoredSet& s) {
  const std::size_t n = s.scores.size();
  std::vector<std::size_t> order;
  std::vector<bool> used(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      if (best == n || s.scores[i] > s.scores[best]) best = i;
    }
    used[best] = true;
    order.push_back(best);
  }
  std::size_t n_pos = 0;
  for (int l : s.labels) n_pos += (l != 0);
  double ap = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!s.labels[order[k]]) continue;
    std::size_t tp = 0;
    for (std::size_t j = 0; j <= k; ++j) tp += (s.labels[order[j]] != 0);
    ap += static_cast<double>(tp) / static_cast<double>(k + 1);
  }
  return ap / static_cast<double>(n_pos);
}

// Exhaustive threshold sweep with per-threshold counting loops.
double min_se_pplus_oracle(const ScoredSet& s) {
  std::size_t n_pos = 0;
  for (int l : s.labels) n_pos += (l != 0);
  double best = 0.0;
  for (double tau : s.scores) {
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < s.scores.size(); ++i) {
      if (s.scores[i] >= tau) {
        if (s.labels[i])
          ++tp;
        else
          ++fp;
      }
    }
    if (tp + fp == 0) continue;
    const double se = static_cast<double>(tp) / static_cast<double>(n_pos);
    const double pp = static_cast<double>(tp) / static_cast<double>(tp + fp);
    best = std::max(best, std::min(se, pp));
  }
  return best;
}

}  // namespace

TEST_CASE("auroc: separated, tied and the worked three-point example") {
  CHECK(auroc({{0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}}) == 1.0);
  CHECK(auroc({{0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}}) == 0.5);
  CHECK(auroc({{0.9, 0.8, 0.3}, {1, 0, 1}}) == 0.5);
}

TEST_CASE("auroc requires both classes") {
  CHECK_THROWS_AS(auroc({{0.1, 0.2}, {1, 1}}), SingleClass);
  CHECK_THROWS_AS(auroc({{0.1, 0.2}, {0, 0}}), SingleClass);
}

TEST_CASE("auprc: perfect ranking and single positive ranked last") {
  CHECK(auprc({{0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}}) == 1.0);
  const std::size_t n = 6;
  ScoredSet s;
  for (std::size_t i = 0; i < n; ++i) {
    s.scores.push_back(1.0 - 0.1 * static_cast<double>(i));
    s.labels.push_back(i + 1 == n ? 1 : 0);
  }
  CHECK(auprc(s) == doctest::Approx(1.0 / static_cast<double>(n)).epsilon(1e-15));
}

TEST_CASE("auprc requires a positive") {
  CHECK_THROWS_AS(auprc({{0.1, 0.2}, {0, 0}}), NoPositives);
}

TEST_CASE("min(se,p+): perfect classifier and the 1-pos-below-1-neg case") {
  CHECK(min_se_pplus({{0.9, 0.1}, {1, 0}}) == 1.0);
  CHECK(min_se_pplus({{0.2, 0.8}, {1, 0}}) == 0.5);
}

TEST_CASE("metrics match brute-force oracles on random sets") {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> size_dist(2, 8);
  std::uniform_int_distribution<int> grid(1, 9);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = size_dist(rng);
    ScoredSet s;
    bool pos = false, neg = false;
    for (int i = 0; i < n; ++i) {
      s.scores.push_back(0.1 * grid(rng));
      const int l = coin(rng);
      s.labels.push_back(l);
      (l ? pos : neg) = true;
    }
    if (!pos) continue;
    if (neg) CHECK(std::fabs(auroc(s) - auroc_oracle(s)) < 1e-12);
    CHECK(std::fabs(auprc(s) - auprc_oracle(s)) < 1e-12);
    CHECK(std::fabs(min_se_pplus(s) - min_se_pplus_oracle(s)) < 1e-12);
  }
}

TEST_CASE("metrics are invariant under strictly increasing transforms") {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    ScoredSet s, t;
    bool pos = false, neg = false;
    for (int i = 0; i < 8; ++i) {
      const double sc = dist(rng);
      const int l = coin(rng);
      s.scores.push_back(sc);
      s.labels.push_back(l);
      t.scores.push_back(std::exp(3.0 * sc) + 1.0);
      t.labels.push_back(l);
      (l ? pos : neg) = true;
    }
    if (!pos || !neg) continue;
    CHECK(auroc(s) == doctest::Approx(auroc(t)).epsilon(1e-12));
    CHECK(auprc(s) == doctest::Approx(auprc(t)).epsilon(1e-12));
    CHECK(min_se_pplus(s) == doctest::Approx(min_se_pplus(t)).epsilon(1e-12));
  }
}

TEST_CASE("auroc label-flip duality on distinct scores") {
  std::mt19937_64 rng(107);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    ScoredSet s;
    bool pos = false, neg = false;
    for (int i = 0; i < 7; ++i) {
      s.scores.push_back(static_cast<double>(i) + 0.001 * static_cast<double>(trial));
      const int l = coin(rng);
      s.labels.push_back(l);
      (l ? pos : neg) = true;
    }
    if (!pos || !neg) continue;
    ScoredSet flipped = s;
    for (int& l : flipped.labels) l = 1 - l;
    CHECK(auroc(s) == doctest::Approx(1.0 - auroc(flipped)).epsilon(1e-12));
  }
}
