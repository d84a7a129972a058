#include "sofanet/nn_ops.hpp"

#include <cmath>

#include "sofanet/errors.hpp"

namespace sofanet {

void linear_forward(const Mat& x, const Mat& W, const Mat& b, Mat& y) {
  matmul_nt(x, W, y);
  add_row_broadcast(y, b);
}

void linear_backward(const Mat& x, const Mat& W, const Mat& dy, Mat& dW_acc, Mat& db_acc, Mat* dx) {
  if (dy.rows != x.rows || dy.cols != W.rows) throw ShapeMismatch("linear_backward: dy shape");
  matmul_tn_acc(dy, x, dW_acc);
  add_col_sums(dy, db_acc);
  if (dx) {
    dx->resize(x.rows, x.cols);
    matmul_nn_acc(dy, W, *dx);
  }
}

double softmax_cross_entropy(std::span<const double> logits, std::size_t label,
                             std::span<double> dlogits) {
  if (label >= logits.size()) throw LabelOutOfRange("class label exceeds logit count");
  if (dlogits.size() != logits.size()) throw ShapeMismatch("softmax_cross_entropy: dlogits size");
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double denom = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) denom += std::exp(logits[i] - mx);
  const double log_denom = std::log(denom);
  for (std::size_t i = 0; i < logits.size(); ++i)
    dlogits[i] = std::exp(logits[i] - mx) / denom - (i == label ? 1.0 : 0.0);
  return log_denom - (logits[label] - mx);
}

double softmax_ce_rows(const Mat& logits, std::span<const int> labels, Mat& dlogits, double scale) {
  if (labels.size() != logits.rows) throw ShapeMismatch("softmax_ce_rows: label count");
  dlogits.resize(logits.rows, logits.cols);
  double total = 0.0;
  std::vector<double> row(logits.cols);
  for (std::size_t i = 0; i < logits.rows; ++i) {
    const int lbl = labels[i];
    if (lbl < 0 || static_cast<std::size_t>(lbl) >= logits.cols)
      throw LabelOutOfRange("class label exceeds logit count");
    total += softmax_cross_entropy(std::span<const double>(logits[i], logits.cols),
                                   static_cast<std::size_t>(lbl), std::span<double>(dlogits[i], logits.cols));
  }
  for (double& g : dlogits.v) g *= scale;
  return total / static_cast<double>(logits.rows);
}

void softmax_rows(const Mat& logits, Mat& probs) {
  probs.resize(logits.rows, logits.cols);
  for (std::size_t i = 0; i < logits.rows; ++i) {
    const double* l = logits[i];
    double* p = probs[i];
    double mx = l[0];
    for (std::size_t j = 1; j < logits.cols; ++j) mx = std::max(mx, l[j]);
    double denom = 0.0;
    for (std::size_t j = 0; j < logits.cols; ++j) {
      p[j] = std::exp(l[j] - mx);
      denom += p[j];
    }
    for (std::size_t j = 0; j < logits.cols; ++j) p[j] /= denom;
  }
}

}  // namespace sofanet
