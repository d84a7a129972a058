#pragma once

#include <span>
#include <vector>

#include "sofanet/mat.hpp"

namespace sofanet {

// y = x * W^T + b   (x: batch x in, W: out x in, b: 1 x out)
void linear_forward(const Mat& x, const Mat& W, const Mat& b, Mat& y);

// Gradients for linear_forward; dW/db accumulate, dx overwritten when non-null.
void linear_backward(const Mat& x, const Mat& W, const Mat& dy, Mat& dW_acc, Mat& db_acc, Mat* dx);

// loss = -log softmax(logits)[label]; dlogits = softmax(logits) - onehot(label).
// Max-subtracted for stability.
double softmax_cross_entropy(std::span<const double> logits, std::size_t label,
                             std::span<double> dlogits);

// Mean cross entropy over rows; dlogits scaled by `scale` (commonly 1/batch).
double softmax_ce_rows(const Mat& logits, std::span<const int> labels, Mat& dlogits, double scale);

// Row-wise softmax probabilities.
void softmax_rows(const Mat& logits, Mat& probs);

}  // namespace sofanet
