#include "sofanet/baselines.hpp"

#include <cmath>
#include <random>

#include "sofanet/errors.hpp"
#include "sofanet/nn_ops.hpp"
#include "sofanet/rng.hpp"
#include "sofanet/sampler.hpp"

namespace sofanet {

namespace {

void check_two_classes(std::span<const int> labels) {
  bool pos = false, neg = false;
  for (int l : labels) (l ? pos : neg) = true;
  if (!pos || !neg) throw SingleClass("training labels contain a single class");
}

Mat gather_rows(const Mat& x, std::span<const std::size_t> which) {
  Mat out(which.size(), x.cols);
  for (std::size_t i = 0; i < which.size(); ++i)
    std::copy(x[which[i]], x[which[i]] + x.cols, out[i]);
  return out;
}

std::vector<int> gather_labels(std::span<const int> labels, std::span<const std::size_t> which) {
  std::vector<int> out(which.size());
  for (std::size_t i = 0; i < which.size(); ++i) out[i] = labels[which[i]];
  return out;
}

}  // namespace

FlatDataset flatten_windows(const std::vector<WindowSample>& windows,
                            std::span<const std::size_t> which, const Standardizer& st) {
  if (which.empty()) throw EmptyResult("no windows to flatten");
  const std::size_t T = windows[which[0]].x.rows;
  const std::size_t f = windows[which[0]].x.cols;
  FlatDataset out;
  out.x.resize(which.size(), T * 2 * f);
  out.labels.resize(which.size());
  for (std::size_t i = 0; i < which.size(); ++i) {
    const WindowSample& w = windows[which[i]];
    double* dst = out.x[i];
    for (std::size_t t = 0; t < T; ++t) {
      const double* x = w.x[t];
      const double* dx = w.dx[t];
      for (std::size_t j = 0; j < f; ++j) {
        dst[t * 2 * f + j] = (x[j] - st.mean[j]) * st.inv_sd[j];
        dst[t * 2 * f + f + j] = dx[j] * st.inv_sd[j];
      }
    }
    out.labels[i] = w.sepsis_label;
  }
  return out;
}

double lr_loss_grads(const ParamSet& p, const Mat& x, std::span<const int> labels, ParamSet& grads_out) {
  const Mat& w = p.at("lr.W").value;
  const Mat& b = p.at("lr.b").value;
  Mat logits;
  linear_forward(x, w, b, logits);

  const double inv_b = 1.0 / static_cast<double>(x.rows);
  Mat dlogits(x.rows, 1);
  double loss = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double z = logits[i][0];
    const double y = labels[i] ? 1.0 : 0.0;
    // stable log(1 + exp(-|z|)) form
    loss += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::fabs(z)));
    const double sig = 1.0 / (1.0 + std::exp(-z));
    dlogits[i][0] = (sig - y) * inv_b;
  }
  linear_backward(x, w, dlogits, grads_out.at("lr.W").grad, grads_out.at("lr.b").grad, nullptr);
  return loss * inv_b;
}

ParamSet train_lr(const FlatDataset& data, const TrainConfig& cfg, std::vector<double>* loss_history) {
  cfg.validate();
  check_two_classes(data.labels);
  ParamSet p;
  p.add("lr.W", 1, data.x.cols);
  p.add("lr.b", 1, 1);
  std::mt19937_64 rng(derive_seed(cfg.seed, 0x6c72u));
  std::uniform_real_distribution<double> dist(-0.01, 0.01);
  for (double& v : p.at("lr.W").value.v) v = dist(rng);

  AdamState adam(p.total_size(), cfg.lr);
  BatchSampler sampler(data.x.rows, cfg.batch_size, derive_seed(cfg.seed, 0x6c7262u));
  for (std::size_t r = 0; r < cfg.rounds; ++r) {
    const std::vector<std::size_t> idx = sampler.next();
    const Mat xb = gather_rows(data.x, idx);
    const std::vector<int> yb = gather_labels(data.labels, idx);
    p.zero_grad();
    const double loss = lr_loss_grads(p, xb, yb, p);
    if (loss_history) loss_history->push_back(loss);
    adam_step(p, p.flatten_grad(), adam);
  }
  return p;
}

std::vector<double> lr_predict(const ParamSet& p, const Mat& x) {
  Mat logits;
  linear_forward(x, p.at("lr.W").value, p.at("lr.b").value, logits);
  std::vector<double> out(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) out[i] = 1.0 / (1.0 + std::exp(-logits[i][0]));
  return out;
}

ParamSet make_nn_params(std::size_t input_dim, std::size_t hidden_dim, std::uint64_t seed) {
  ParamSet p;
  p.add("nn.W1", hidden_dim, input_dim);
  p.add("nn.b1", 1, hidden_dim);
  p.add("nn.W2", 2, hidden_dim);
  p.add("nn.b2", 1, 2);
  std::mt19937_64 rng(derive_seed(seed, 0x6e6eu));
  std::uniform_real_distribution<double> d1(-std::sqrt(1.0 / static_cast<double>(input_dim)),
                                            std::sqrt(1.0 / static_cast<double>(input_dim)));
  std::uniform_real_distribution<double> d2(-std::sqrt(1.0 / static_cast<double>(hidden_dim)),
                                            std::sqrt(1.0 / static_cast<double>(hidden_dim)));
  for (double& v : p.at("nn.W1").value.v) v = d1(rng);
  for (double& v : p.at("nn.W2").value.v) v = d2(rng);
  return p;
}

double nn_loss_grads(ParamSet& p, const Mat& x, std::span<const int> labels) {
  Mat a1;
  linear_forward(x, p.at("nn.W1").value, p.at("nn.b1").value, a1);
  Mat h1 = a1;
  for (double& v : h1.v) v = std::tanh(v);
  Mat logits;
  linear_forward(h1, p.at("nn.W2").value, p.at("nn.b2").value, logits);

  Mat dlogits;
  const double loss = softmax_ce_rows(logits, labels, dlogits, 1.0 / static_cast<double>(x.rows));

  Mat dh1;
  linear_backward(h1, p.at("nn.W2").value, dlogits, p.at("nn.W2").grad, p.at("nn.b2").grad, &dh1);
  for (std::size_t i = 0; i < dh1.size(); ++i) dh1.v[i] *= 1.0 - h1.v[i] * h1.v[i];
  linear_backward(x, p.at("nn.W1").value, dh1, p.at("nn.W1").grad, p.at("nn.b1").grad, nullptr);
  return loss;
}

ParamSet train_nn(const FlatDataset& data, std::size_t hidden_dim, const TrainConfig& cfg,
                  std::vector<double>* loss_history) {
  cfg.validate();
  check_two_classes(data.labels);
  ParamSet p = make_nn_params(data.x.cols, hidden_dim, cfg.seed);
  AdamState adam(p.total_size(), cfg.lr);
  BatchSampler sampler(data.x.rows, cfg.batch_size, derive_seed(cfg.seed, 0x6e6e62u));
  for (std::size_t r = 0; r < cfg.rounds; ++r) {
    const std::vector<std::size_t> idx = sampler.next();
    const Mat xb = gather_rows(data.x, idx);
    const std::vector<int> yb = gather_labels(data.labels, idx);
    p.zero_grad();
    const double loss = nn_loss_grads(p, xb, yb);
    if (loss_history) loss_history->push_back(loss);
    adam_step(p, p.flatten_grad(), adam);
  }
  return p;
}

std::vector<double> nn_predict(const ParamSet& p, const Mat& x) {
  Mat a1;
  linear_forward(x, p.at("nn.W1").value, p.at("nn.b1").value, a1);
  for (double& v : a1.v) v = std::tanh(v);
  Mat logits;
  linear_forward(a1, p.at("nn.W2").value, p.at("nn.b2").value, logits);
  Mat probs;
  softmax_rows(logits, probs);
  std::vector<double> out(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) out[i] = probs[i][1];
  return out;
}

}  // namespace sofanet
