#include "sofanet/mmd.hpp"

#include <algorithm>
#include <cmath>

#include "sofanet/errors.hpp"

namespace sofanet {

namespace {

void check_batches(const Mat& z1, const Mat& z2) {
  if (z1.cols != z2.cols) throw DimMismatch("hidden batches have different widths");
  if (z1.rows == 0 || z2.rows == 0) throw DimMismatch("hidden batch is empty");
}

double sqdist(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

std::vector<double> mean_row(const Mat& z) {
  std::vector<double> mu(z.cols, 0.0);
  for (std::size_t i = 0; i < z.rows; ++i) {
    const double* zi = z[i];
    for (std::size_t j = 0; j < z.cols; ++j) mu[j] += zi[j];
  }
  for (double& m : mu) m /= static_cast<double>(z.rows);
  return mu;
}

// Deterministic order on batches, so the estimator sums terms in the same
// order however the caller passes the pair: mmd(a,b) == mmd(b,a) exactly.
bool batch_less(const Mat& a, const Mat& b) {
  if (a.rows != b.rows) return a.rows < b.rows;
  if (a.cols != b.cols) return a.cols < b.cols;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.v[i] != b.v[i]) return a.v[i] < b.v[i];
  return false;
}

}  // namespace

double mmd_linear(const Mat& z1, const Mat& z2) {
  check_batches(z1, z2);
  const std::vector<double> m1 = mean_row(z1);
  const std::vector<double> m2 = mean_row(z2);
  double s = 0.0;
  for (std::size_t j = 0; j < m1.size(); ++j) {
    const double d = m1[j] - m2[j];
    s += d * d;
  }
  return s;
}

double mmd_rbf(const Mat& z1_in, const Mat& z2_in, const std::vector<double>& bandwidths) {
  check_batches(z1_in, z2_in);
  if (bandwidths.empty()) throw NonpositiveBandwidth("bandwidth list is empty");
  for (double g : bandwidths)
    if (!(g > 0.0)) throw NonpositiveBandwidth("bandwidths must be positive");

  const bool swap = batch_less(z2_in, z1_in);
  const Mat& z1 = swap ? z2_in : z1_in;
  const Mat& z2 = swap ? z1_in : z2_in;
  const std::size_t n1 = z1.rows, n2 = z2.rows, d = z1.cols;
  double total = 0.0;
  for (double gamma : bandwidths) {
    const double inv = 1.0 / (2.0 * gamma * gamma);
    double t11 = 0.0, t22 = 0.0, t12 = 0.0;
    for (std::size_t i = 0; i < n1; ++i)
      for (std::size_t j = 0; j < n1; ++j) t11 += std::exp(-sqdist(z1[i], z1[j], d) * inv);
    for (std::size_t i = 0; i < n2; ++i)
      for (std::size_t j = 0; j < n2; ++j) t22 += std::exp(-sqdist(z2[i], z2[j], d) * inv);
    for (std::size_t i = 0; i < n1; ++i)
      for (std::size_t j = 0; j < n2; ++j) t12 += std::exp(-sqdist(z1[i], z2[j], d) * inv);
    total += t11 / static_cast<double>(n1 * n1) + t22 / static_cast<double>(n2 * n2) -
             2.0 * t12 / static_cast<double>(n1 * n2);
  }
  return total / static_cast<double>(bandwidths.size());
}

double median_heuristic(const Mat& z1, const Mat& z2) {
  check_batches(z1, z2);
  const std::size_t n = z1.rows + z2.rows;
  if (n < 2) throw DimMismatch("median heuristic needs at least two pooled rows");
  auto row = [&](std::size_t i) { return i < z1.rows ? z1[i] : z2[i - z1.rows]; };

  std::vector<double> dists;
  dists.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) dists.push_back(sqdist(row(i), row(j), z1.cols));

  const std::size_t mid = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid), dists.end());
  double med = dists[mid];
  if (dists.size() % 2 == 0) {
    const double hi = med;
    std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid) - 1,
                     dists.begin() + static_cast<std::ptrdiff_t>(mid));
    med = (dists[mid - 1] + hi) / 2.0;
  }
  if (med <= 0.0) return 1.0;
  return std::sqrt(med / 2.0);
}

std::vector<double> bandwidth_ladder(double gamma) {
  return {gamma / 4.0, gamma / 2.0, gamma, 2.0 * gamma, 4.0 * gamma};
}

void mmd_backward(const Mat& z1, const Mat& z2, MmdKind kind, const std::vector<double>& bandwidths,
                  Mat& dz1, Mat& dz2) {
  check_batches(z1, z2);
  const std::size_t n1 = z1.rows, n2 = z2.rows, d = z1.cols;
  dz1.resize(n1, d);
  dz2.resize(n2, d);

  if (kind == MmdKind::Linear) {
    const std::vector<double> m1 = mean_row(z1);
    const std::vector<double> m2 = mean_row(z2);
    for (std::size_t j = 0; j < d; ++j) {
      const double g = 2.0 * (m1[j] - m2[j]);
      const double g1 = g / static_cast<double>(n1);
      const double g2 = -g / static_cast<double>(n2);
      for (std::size_t i = 0; i < n1; ++i) dz1[i][j] = g1;
      for (std::size_t i = 0; i < n2; ++i) dz2[i][j] = g2;
    }
    return;
  }

  if (bandwidths.empty()) throw NonpositiveBandwidth("bandwidth list is empty");
  for (double g : bandwidths)
    if (!(g > 0.0)) throw NonpositiveBandwidth("bandwidths must be positive");

  const double kscale = 1.0 / static_cast<double>(bandwidths.size());
  const double w11 = kscale / static_cast<double>(n1 * n1);
  const double w22 = kscale / static_cast<double>(n2 * n2);
  const double w12 = 2.0 * kscale / static_cast<double>(n1 * n2);

  for (double gamma : bandwidths) {
    const double inv = 1.0 / (2.0 * gamma * gamma);
    // d/da exp(-||a-b||^2 inv) = -2 inv (a-b) k; within-term pairs (i,j) and
    // (j,i) both contribute, handled by iterating the full square.
    for (std::size_t i = 0; i < n1; ++i) {
      double* gi = dz1[i];
      for (std::size_t j = 0; j < n1; ++j) {
        const double k = std::exp(-sqdist(z1[i], z1[j], d) * inv);
        const double c = -2.0 * inv * k * w11 * 2.0;  // symmetric pair
        for (std::size_t t = 0; t < d; ++t) gi[t] += c * (z1[i][t] - z1[j][t]);
      }
      for (std::size_t j = 0; j < n2; ++j) {
        const double k = std::exp(-sqdist(z1[i], z2[j], d) * inv);
        const double c = 2.0 * inv * k * w12;  // minus sign of the cross term
        for (std::size_t t = 0; t < d; ++t) gi[t] += c * (z1[i][t] - z2[j][t]);
      }
    }
    for (std::size_t i = 0; i < n2; ++i) {
      double* gi = dz2[i];
      for (std::size_t j = 0; j < n2; ++j) {
        const double k = std::exp(-sqdist(z2[i], z2[j], d) * inv);
        const double c = -2.0 * inv * k * w22 * 2.0;
        for (std::size_t t = 0; t < d; ++t) gi[t] += c * (z2[i][t] - z2[j][t]);
      }
      for (std::size_t j = 0; j < n1; ++j) {
        const double k = std::exp(-sqdist(z2[i], z1[j], d) * inv);
        const double c = 2.0 * inv * k * w12;
        for (std::size_t t = 0; t < d; ++t) gi[t] += c * (z2[i][t] - z1[j][t]);
      }
    }
  }
}

}  // namespace sofanet
