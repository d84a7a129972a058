#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace sofanet {

// Dense row-major matrix of doubles. Row vectors are 1 x n.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), v(r * c, fill) {}

  double* operator[](std::size_t r) { return v.data() + r * cols; }
  const double* operator[](std::size_t r) const { return v.data() + r * cols; }

  std::size_t size() const { return v.size(); }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
  void zero() { std::fill(v.begin(), v.end(), 0.0); }
  void resize(std::size_t r, std::size_t c) {
    rows = r;
    cols = c;
    v.assign(r * c, 0.0);
  }
};

// out = a * b^T   (a: n x k, b: m x k) -> n x m
void matmul_nt(const Mat& a, const Mat& b, Mat& out);

// out = a * b     (a: n x k, b: k x m) -> n x m
void matmul_nn(const Mat& a, const Mat& b, Mat& out);

// out += a^T * b  (a: k x n, b: k x m) -> accumulates into n x m
void matmul_tn_acc(const Mat& a, const Mat& b, Mat& out);

// out += a * b    (a: n x k, b: k x m)
void matmul_nn_acc(const Mat& a, const Mat& b, Mat& out);

// y[r] += bias for every row r (bias: 1 x cols)
void add_row_broadcast(Mat& y, const Mat& bias);

// bias_grad (1 x cols) += column sums of dy
void add_col_sums(const Mat& dy, Mat& bias_grad);

}  // namespace sofanet
