#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sofanet/gru.hpp"
#include "sofanet/params.hpp"
#include "sofanet/patient.hpp"

namespace sofanet {

// multi_channel=false collapses the extractor to a single GRU of width
// n_channels*hidden_dim whose final state feeds every head; sofa_heads=false
// drops the auxiliary heads entirely (the plain GRU classifier).
struct ModelConfig {
  std::size_t feature_count = 27;
  std::size_t hidden_dim = 32;
  std::size_t n_channels = 4;
  std::size_t n_sofa_classes = 5;
  double alpha = 0.5;
  bool multi_channel = true;
  bool sofa_heads = true;

  std::size_t input_dim() const { return 2 * feature_count; }
  std::size_t rep_dim() const { return n_channels * hidden_dim; }
};

// Expected parameter count for a config; asserted against the manifest.
std::size_t sofanet_param_count(const ModelConfig& cfg);

// Fresh parameters: GRU weights uniform in +-sqrt(1/width), head weights
// uniform in +-sqrt(1/fan_in), zero biases.
ParamSet make_sofanet_params(const ModelConfig& cfg, std::uint64_t seed);

// Per-feature affine input scaling fit on training windows; applied to both
// the original and the differential half of the input.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> inv_sd;
};

Standardizer fit_standardizer(const std::vector<WindowSample>& windows);

// xs[t] is the batch x 2F input at step t: standardized x then scaled dx.
void tensorize_windows(const std::vector<WindowSample>& windows, std::span<const std::size_t> which,
                       const Standardizer& st, std::vector<Mat>& xs);

struct ModelOutputs {
  std::vector<Mat> sofa_logits;  // n_channels of batch x n_sofa_classes (empty without heads)
  Mat sepsis_logits;             // batch x 2
  Mat z;                         // batch x rep_dim
};

struct ModelCache {
  std::vector<GruCache> gru;  // per channel (single entry when !multi_channel)
  std::vector<Mat> h_last;    // channel-final hidden states
};

void sofanet_forward(const std::vector<Mat>& xs, const ParamSet& params, const ModelConfig& cfg,
                     ModelOutputs& out, ModelCache* cache);

struct LossGrads {
  Mat dsepsis;              // batch x 2, already scaled by 1/batch
  std::vector<Mat> dsofa;   // per channel, scaled by alpha/batch
};

// Mean over the batch of CE(sepsis) + alpha * sum_i CE(sofa_i).
double sofanet_local_loss(const ModelOutputs& out, std::span<const int> sepsis_labels,
                          std::span<const std::array<int, 4>> sofa_labels, const ModelConfig& cfg,
                          LossGrads& lg);

// Accumulates parameter gradients; dz_extra (batch x rep_dim) adds an
// external gradient on z, e.g. the alignment term.
void sofanet_backward(ParamSet& params, const ModelConfig& cfg, const std::vector<Mat>& xs,
                      const ModelCache& cache, const ModelOutputs& out, const LossGrads& lg,
                      const Mat* dz_extra);

// P(sepsis) for each window in `which`.
std::vector<double> predict_proba(const std::vector<WindowSample>& windows,
                                  std::span<const std::size_t> which, const Standardizer& st,
                                  const ParamSet& params, const ModelConfig& cfg);

}  // namespace sofanet
