#pragma once

#include <vector>

#include "sofanet/mat.hpp"

namespace sofanet {

enum class MmdKind { Linear, Rbf };

// Squared distance between batch means: ||mean(Z1) - mean(Z2)||^2.
double mmd_linear(const Mat& z1, const Mat& z2);

// Biased (diagonal-inclusive) V-statistic averaged over RBF kernels
// k(a,b) = exp(-||a-b||^2 / (2 gamma^2)); nonnegative by construction.
double mmd_rbf(const Mat& z1, const Mat& z2, const std::vector<double>& bandwidths);

// gamma = sqrt(median(pairwise squared distances over the pooled batch) / 2);
// a zero median falls back to 1.0.
double median_heuristic(const Mat& z1, const Mat& z2);

// The five-bandwidth ladder around the median heuristic: gamma/4 .. 4*gamma.
std::vector<double> bandwidth_ladder(double gamma);

// Exact gradients of the chosen estimator with respect to both batches.
void mmd_backward(const Mat& z1, const Mat& z2, MmdKind kind, const std::vector<double>& bandwidths,
                  Mat& dz1, Mat& dz2);

}  // namespace sofanet
