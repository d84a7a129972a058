#include "sofanet/mat.hpp"

#include "sofanet/errors.hpp"

namespace sofanet {

void matmul_nt(const Mat& a, const Mat& b, Mat& out) {
  if (a.cols != b.cols) throw ShapeMismatch("matmul_nt: inner dimensions differ");
  out.resize(a.rows, b.rows);
  const std::size_t k = a.cols;
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ai = a[i];
    double* oi = out[i];
    for (std::size_t j = 0; j < b.rows; ++j) {
      const double* bj = b[j];
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) acc += ai[t] * bj[t];
      oi[j] = acc;
    }
  }
}

void matmul_nn(const Mat& a, const Mat& b, Mat& out) {
  if (a.cols != b.rows) throw ShapeMismatch("matmul_nn: inner dimensions differ");
  out.resize(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ai = a[i];
    double* oi = out[i];
    for (std::size_t t = 0; t < a.cols; ++t) {
      const double s = ai[t];
      const double* bt = b[t];
      for (std::size_t j = 0; j < b.cols; ++j) oi[j] += s * bt[j];
    }
  }
}

void matmul_nn_acc(const Mat& a, const Mat& b, Mat& out) {
  if (a.cols != b.rows || out.rows != a.rows || out.cols != b.cols)
    throw ShapeMismatch("matmul_nn_acc: dimensions differ");
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ai = a[i];
    double* oi = out[i];
    for (std::size_t t = 0; t < a.cols; ++t) {
      const double s = ai[t];
      const double* bt = b[t];
      for (std::size_t j = 0; j < b.cols; ++j) oi[j] += s * bt[j];
    }
  }
}

void matmul_tn_acc(const Mat& a, const Mat& b, Mat& out) {
  if (a.rows != b.rows || out.rows != a.cols || out.cols != b.cols)
    throw ShapeMismatch("matmul_tn_acc: dimensions differ");
  for (std::size_t t = 0; t < a.rows; ++t) {
    const double* at = a[t];
    const double* bt = b[t];
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double s = at[i];
      double* oi = out[i];
      for (std::size_t j = 0; j < b.cols; ++j) oi[j] += s * bt[j];
    }
  }
}

void add_row_broadcast(Mat& y, const Mat& bias) {
  if (bias.rows != 1 || bias.cols != y.cols) throw ShapeMismatch("add_row_broadcast: bias shape");
  const double* b = bias[0];
  for (std::size_t i = 0; i < y.rows; ++i) {
    double* yi = y[i];
    for (std::size_t j = 0; j < y.cols; ++j) yi[j] += b[j];
  }
}

void add_col_sums(const Mat& dy, Mat& bias_grad) {
  if (bias_grad.rows != 1 || bias_grad.cols != dy.cols) throw ShapeMismatch("add_col_sums: bias shape");
  double* g = bias_grad[0];
  for (std::size_t i = 0; i < dy.rows; ++i) {
    const double* di = dy[i];
    for (std::size_t j = 0; j < dy.cols; ++j) g[j] += di[j];
  }
}

}  // namespace sofanet
