#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "sofanet/errors.hpp"
#include "sofanet/mmd.hpp"
#include "testutil.hpp"

using namespace sofanet;

namespace {

// Direct mean-difference computation, scalar loops only.
double mmd_linear_oracle(const Mat& z1, const Mat& z2) {
  double out = 0.0;
  for (std::size_t j = 0; j < z1.cols; ++j) {
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < z1.rows; ++i) m1 += z1[i][j];
    for (std::size_t i = 0; i < z2.rows; ++i) m2 += z2[i][j];
    m1 /= static_cast<double>(z1.rows);
    m2 /= static_cast<double>(z2.rows);
    out += (m1 - m2) * (m1 - m2);
  }
  return out;
}

// Brute-force double sums per kernel.
double mmd_rbf_oracle(const Mat& z1, const Mat& z2, const std::vector<double>& bws) {
  auto k = [&](const double* a, const double* b, double gamma) {
    double d2 = 0.0;
    for (std::size_t t = 0; t < z1.cols; ++t) d2 += (a[t] - b[t]) * (a[t] - b[t]);
    return std::exp(-d2 / (2.0 * gamma * gamma));
  };
  double total = 0.0;
  for (double g : bws) {
    double s = 0.0;
    for (std::size_t i = 0; i < z1.rows; ++i)
      for (std::size_t j = 0; j < z1.rows; ++j)
        s += k(z1[i], z1[j], g) / static_cast<double>(z1.rows * z1.rows);
    for (std::size_t i = 0; i < z2.rows; ++i)
      for (std::size_t j = 0; j < z2.rows; ++j)
        s += k(z2[i], z2[j], g) / static_cast<double>(z2.rows * z2.rows);
    for (std::size_t i = 0; i < z1.rows; ++i)
      for (std::size_t j = 0; j < z2.rows; ++j)
        s -= 2.0 * k(z1[i], z2[j], g) / static_cast<double>(z1.rows * z2.rows);
    total += s;
  }
  return total / static_cast<double>(bws.size());
}

Mat random_mat(std::size_t n, std::size_t d, std::mt19937_64& rng, double spread = 1.0) {
  Mat m(n, d);
  std::uniform_real_distribution<double> dist(-spread, spread);
  for (double& v : m.v) v = dist(rng);
  return m;
}

}  // namespace

TEST_CASE("linear mmd: identity, orthogonal means, oracle agreement") {
  std::mt19937_64 rng(401);
  const Mat z = random_mat(5, 3, rng);
  CHECK(mmd_linear(z, z) == 0.0);

  Mat z1(3, 2), z2(4, 2);
  for (std::size_t i = 0; i < 3; ++i) z1[i][0] = 1.0;
  for (std::size_t i = 0; i < 4; ++i) z2[i][1] = 1.0;
  CHECK(mmd_linear(z1, z2) == doctest::Approx(2.0).epsilon(1e-15));

  for (int t = 0; t < 50; ++t) {
    const Mat a = random_mat(4, 3, rng);
    const Mat b = random_mat(6, 3, rng);
    CHECK(std::fabs(mmd_linear(a, b) - mmd_linear_oracle(a, b)) < 1e-12);
  }
}

TEST_CASE("rbf mmd: identical batches give zero, flat kernel gives zero") {
  std::mt19937_64 rng(409);
  const Mat z = random_mat(5, 4, rng);
  CHECK(std::fabs(mmd_rbf(z, z, {0.5, 1.0, 2.0})) <= 1e-12);

  const Mat a = random_mat(4, 3, rng);
  const Mat b = random_mat(4, 3, rng);
  CHECK(std::fabs(mmd_rbf(a, b, {1e9})) < 1e-12);
}

TEST_CASE("rbf mmd: two-point 1-D case against a hand double sum") {
  Mat z1(2, 1), z2(2, 1);
  z1[0][0] = 0.0;
  z1[1][0] = 1.0;
  z2[0][0] = 2.0;
  z2[1][0] = 3.0;
  const double g = 1.3;
  auto k = [g](double a, double b) { return std::exp(-(a - b) * (a - b) / (2 * g * g)); };
  const double want = (k(0, 0) + k(0, 1) + k(1, 0) + k(1, 1)) / 4.0 +
                      (k(2, 2) + k(2, 3) + k(3, 2) + k(3, 3)) / 4.0 -
                      2.0 * (k(0, 2) + k(0, 3) + k(1, 2) + k(1, 3)) / 4.0;
  CHECK(mmd_rbf(z1, z2, {g}) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("rbf mmd matches the double-sum oracle on random batch pairs") {
  std::mt19937_64 rng(419);
  std::uniform_int_distribution<std::size_t> nd(1, 6), dd(1, 4);
  for (int t = 0; t < 100; ++t) {
    const Mat a = random_mat(nd(rng), dd(rng), rng, 2.0);
    const Mat b = random_mat(nd(rng), a.cols, rng, 2.0);
    const std::vector<double> bws = bandwidth_ladder(median_heuristic(a, b));
    CHECK(std::fabs(mmd_rbf(a, b, bws) - mmd_rbf_oracle(a, b, bws)) < 1e-10);
  }
}

TEST_CASE("mmd symmetry and nonnegativity") {
  std::mt19937_64 rng(421);
  for (int t = 0; t < 50; ++t) {
    const Mat a = random_mat(4, 3, rng);
    const Mat b = random_mat(5, 3, rng);
    CHECK(mmd_linear(a, b) == mmd_linear(b, a));
    CHECK(mmd_linear(a, b) >= 0.0);
    const std::vector<double> bws = {0.7, 1.4};
    CHECK(mmd_rbf(a, b, bws) == mmd_rbf(b, a, bws));
    CHECK(mmd_rbf(a, b, bws) >= -1e-12);
  }
}

TEST_CASE("translation strictly increases linear mmd away from zero") {
  std::mt19937_64 rng(431);
  const Mat z = random_mat(5, 3, rng);
  Mat shifted = z;
  for (std::size_t i = 0; i < shifted.rows; ++i) shifted[i][1] += 0.5;
  CHECK(mmd_linear(z, z) == 0.0);
  CHECK(mmd_linear(z, shifted) > 0.0);
}

TEST_CASE("median heuristic: single pair, degenerate fallback, sort oracle") {
  Mat a(1, 1), b(1, 1);
  a[0][0] = 0.0;
  b[0][0] = 2.0;
  CHECK(median_heuristic(a, b) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

  Mat same(3, 2);
  CHECK(median_heuristic(same, same) == 1.0);

  std::mt19937_64 rng(433);
  for (int t = 0; t < 30; ++t) {
    const Mat z1 = random_mat(4, 3, rng);
    const Mat z2 = random_mat(3, 3, rng);
    // oracle: full sort of all pairwise squared distances over the pool
    std::vector<const double*> rows;
    for (std::size_t i = 0; i < 4; ++i) rows.push_back(z1[i]);
    for (std::size_t i = 0; i < 3; ++i) rows.push_back(z2[i]);
    std::vector<double> d2;
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = i + 1; j < rows.size(); ++j) {
        double s = 0.0;
        for (std::size_t c = 0; c < 3; ++c)
          s += (rows[i][c] - rows[j][c]) * (rows[i][c] - rows[j][c]);
        d2.push_back(s);
      }
    std::sort(d2.begin(), d2.end());
    const std::size_t n = d2.size();
    const double med = n % 2 ? d2[n / 2] : (d2[n / 2 - 1] + d2[n / 2]) / 2.0;
    CHECK(median_heuristic(z1, z2) == doctest::Approx(std::sqrt(med / 2.0)).epsilon(1e-12));
  }
}

TEST_CASE("mmd gradients: identical batches give zero linear gradient") {
  std::mt19937_64 rng(439);
  const Mat z = random_mat(4, 3, rng);
  Mat d1, d2;
  mmd_backward(z, z, MmdKind::Linear, {}, d1, d2);
  for (double v : d1.v) CHECK(v == 0.0);
  for (double v : d2.v) CHECK(v == 0.0);
}

TEST_CASE("mmd gradients pass finite-difference checks, both estimators") {
  std::mt19937_64 rng(443);
  for (int t = 0; t < 20; ++t) {
    Mat z1 = random_mat(4, 3, rng);
    Mat z2 = random_mat(5, 3, rng);
    for (MmdKind kind : {MmdKind::Linear, MmdKind::Rbf}) {
      const std::vector<double> bws =
          kind == MmdKind::Rbf ? bandwidth_ladder(median_heuristic(z1, z2)) : std::vector<double>{};
      auto value = [&] {
        return kind == MmdKind::Rbf ? mmd_rbf(z1, z2, bws) : mmd_linear(z1, z2);
      };
      Mat d1, d2;
      mmd_backward(z1, z2, kind, bws, d1, d2);
      CHECK(testutil::fd_check_mat(z1, d1, value) < 1e-5);
      CHECK(testutil::fd_check_mat(z2, d2, value) < 1e-5);
    }
  }
}

TEST_CASE("swapping the batches swaps the gradients") {
  std::mt19937_64 rng(449);
  const Mat z1 = random_mat(3, 2, rng);
  const Mat z2 = random_mat(4, 2, rng);
  const std::vector<double> bws = {0.9};
  Mat d1, d2, e1, e2;
  mmd_backward(z1, z2, MmdKind::Rbf, bws, d1, d2);
  mmd_backward(z2, z1, MmdKind::Rbf, bws, e1, e2);
  for (std::size_t i = 0; i < d1.size(); ++i) CHECK(d1.v[i] == e2.v[i]);
  for (std::size_t i = 0; i < d2.size(); ++i) CHECK(d2.v[i] == e1.v[i]);
}

TEST_CASE("mmd input validation") {
  Mat a(2, 3), b(2, 4);
  CHECK_THROWS_AS(mmd_linear(a, b), DimMismatch);
  Mat c(2, 3);
  CHECK_THROWS_AS(mmd_rbf(a, c, {}), NonpositiveBandwidth);
  CHECK_THROWS_AS(mmd_rbf(a, c, {-1.0}), NonpositiveBandwidth);
}
