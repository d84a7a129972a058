#pragma once

#include <span>
#include <vector>

#include "sofanet/model.hpp"
#include "sofanet/params.hpp"
#include "sofanet/train_config.hpp"

namespace sofanet {

// Window rows concatenated (standardized x then scaled dx): 6 * 2F features.
struct FlatDataset {
  Mat x;
  std::vector<int> labels;
};

FlatDataset flatten_windows(const std::vector<WindowSample>& windows,
                            std::span<const std::size_t> which, const Standardizer& st);

// Logistic regression trained by the shared Adam loop on binary cross
// entropy. Throws SingleClass when only one label is present.
ParamSet train_lr(const FlatDataset& data, const TrainConfig& cfg,
                  std::vector<double>* loss_history = nullptr);

std::vector<double> lr_predict(const ParamSet& p, const Mat& x);

// Loss and gradient for one batch; exposed for gradient checking.
double lr_loss_grads(const ParamSet& p, const Mat& x, std::span<const int> labels, ParamSet& grads_out);

// One tanh hidden layer of cfg width, two-class softmax output.
ParamSet make_nn_params(std::size_t input_dim, std::size_t hidden_dim, std::uint64_t seed);
ParamSet train_nn(const FlatDataset& data, std::size_t hidden_dim, const TrainConfig& cfg,
                  std::vector<double>* loss_history = nullptr);
std::vector<double> nn_predict(const ParamSet& p, const Mat& x);
double nn_loss_grads(ParamSet& p, const Mat& x, std::span<const int> labels);

// The plain GRU classifier is the SofaNet skeleton minus auxiliary heads.
inline ModelConfig gru_baseline_config(const ModelConfig& base) {
  ModelConfig cfg = base;
  cfg.multi_channel = false;
  cfg.sofa_heads = false;
  return cfg;
}

inline ModelConfig sofanet_womc_config(const ModelConfig& base) {
  ModelConfig cfg = base;
  cfg.multi_channel = false;
  cfg.sofa_heads = true;
  return cfg;
}

}  // namespace sofanet
