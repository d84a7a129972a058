#include "sofanet/model.hpp"

#include <cmath>
#include <random>

#include "sofanet/errors.hpp"
#include "sofanet/nn_ops.hpp"
#include "sofanet/rng.hpp"

namespace sofanet {

namespace {

std::string channel_prefix(const ModelConfig& cfg, std::size_t c) {
  return cfg.multi_channel ? "ch" + std::to_string(c) + "." : "gru.";
}

void init_uniform(Mat& m, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : m.v) v = dist(rng);
}

}  // namespace

std::size_t sofanet_param_count(const ModelConfig& cfg) {
  const std::size_t in = cfg.input_dim();
  std::size_t total = 0;
  if (cfg.multi_channel) {
    const std::size_t h = cfg.hidden_dim;
    total += cfg.n_channels * 3 * (h * in + h * h + h);
    if (cfg.sofa_heads) total += cfg.n_channels * (cfg.n_sofa_classes * h + cfg.n_sofa_classes);
  } else {
    const std::size_t h = cfg.rep_dim();
    total += 3 * (h * in + h * h + h);
    if (cfg.sofa_heads) total += cfg.n_channels * (cfg.n_sofa_classes * h + cfg.n_sofa_classes);
  }
  total += 2 * cfg.rep_dim() + 2;
  return total;
}

ParamSet make_sofanet_params(const ModelConfig& cfg, std::uint64_t seed) {
  if (cfg.hidden_dim == 0 || cfg.n_channels == 0) throw ConfigInvalid("model dimensions must be positive");
  if (cfg.alpha < 0.0) throw ConfigInvalid("alpha must be non-negative");

  ParamSet p;
  const std::size_t gru_width = cfg.multi_channel ? cfg.hidden_dim : cfg.rep_dim();
  const std::size_t n_grus = cfg.multi_channel ? cfg.n_channels : 1;
  for (std::size_t c = 0; c < n_grus; ++c)
    add_gru_params(p, channel_prefix(cfg, c), cfg.input_dim(), gru_width);
  if (cfg.sofa_heads) {
    const std::size_t head_in = cfg.multi_channel ? cfg.hidden_dim : cfg.rep_dim();
    for (std::size_t c = 0; c < cfg.n_channels; ++c) {
      p.add("sofa" + std::to_string(c) + ".W", cfg.n_sofa_classes, head_in);
      p.add("sofa" + std::to_string(c) + ".b", 1, cfg.n_sofa_classes);
    }
  }
  p.add("sepsis.W", 2, cfg.rep_dim());
  p.add("sepsis.b", 1, 2);

  std::mt19937_64 rng(derive_seed(seed, 0x6d6f64u));
  for (auto& t : p.items) {
    if (t.value.rows == 1) continue;  // biases stay zero
    const bool is_head = t.name.ends_with(".W");
    const double bound = is_head ? std::sqrt(1.0 / static_cast<double>(t.value.cols))
                                 : std::sqrt(1.0 / static_cast<double>(gru_width));
    init_uniform(t.value, bound, rng);
  }
  return p;
}

Standardizer fit_standardizer(const std::vector<WindowSample>& windows) {
  if (windows.empty()) throw EmptyResult("cannot fit a standardizer on zero windows");
  const std::size_t f = windows[0].x.cols;
  std::vector<double> sum(f, 0.0), sumsq(f, 0.0);
  std::size_t n = 0;
  for (const auto& w : windows) {
    for (std::size_t t = 0; t < w.x.rows; ++t) {
      const double* row = w.x[t];
      for (std::size_t j = 0; j < f; ++j) {
        sum[j] += row[j];
        sumsq[j] += row[j] * row[j];
      }
    }
    n += w.x.rows;
  }
  Standardizer st;
  st.mean.resize(f);
  st.inv_sd.resize(f);
  for (std::size_t j = 0; j < f; ++j) {
    st.mean[j] = sum[j] / static_cast<double>(n);
    const double var = sumsq[j] / static_cast<double>(n) - st.mean[j] * st.mean[j];
    st.inv_sd[j] = var > 1e-12 ? 1.0 / std::sqrt(var) : 0.0;
  }
  return st;
}

void tensorize_windows(const std::vector<WindowSample>& windows, std::span<const std::size_t> which,
                       const Standardizer& st, std::vector<Mat>& xs) {
  if (which.empty()) throw EmptyResult("empty batch");
  const WindowSample& first = windows[which[0]];
  const std::size_t T = first.x.rows;
  const std::size_t f = first.x.cols;
  if (st.mean.size() != f) throw LengthMismatch("standardizer width differs from feature count");

  xs.assign(T, Mat(which.size(), 2 * f));
  for (std::size_t b = 0; b < which.size(); ++b) {
    const WindowSample& w = windows[which[b]];
    for (std::size_t t = 0; t < T; ++t) {
      double* dst = xs[t][b];
      const double* x = w.x[t];
      const double* dx = w.dx[t];
      for (std::size_t j = 0; j < f; ++j) {
        dst[j] = (x[j] - st.mean[j]) * st.inv_sd[j];
        dst[f + j] = dx[j] * st.inv_sd[j];
      }
    }
  }
}

void sofanet_forward(const std::vector<Mat>& xs, const ParamSet& params, const ModelConfig& cfg,
                     ModelOutputs& out, ModelCache* cache) {
  if (xs.empty() || xs[0].cols != cfg.input_dim())
    throw ShapeMismatch("sofanet_forward: input width differs from 2F");
  const std::size_t batch = xs[0].rows;
  const std::size_t n_grus = cfg.multi_channel ? cfg.n_channels : 1;

  ModelCache local;
  ModelCache& cc = cache ? *cache : local;
  cc.gru.assign(n_grus, GruCache());
  cc.h_last.assign(n_grus, Mat());

  out.z.resize(batch, cfg.rep_dim());
  for (std::size_t c = 0; c < n_grus; ++c) {
    const GruRefs w = gru_refs(params, channel_prefix(cfg, c));
    gru_forward_seq(xs, Mat(), w, cc.gru[c]);
    cc.h_last[c] = cc.gru[c].h.back();
    const Mat& h = cc.h_last[c];
    const std::size_t off = cfg.multi_channel ? c * cfg.hidden_dim : 0;
    for (std::size_t b = 0; b < batch; ++b)
      std::copy(h[b], h[b] + h.cols, out.z[b] + off);
  }

  out.sofa_logits.clear();
  if (cfg.sofa_heads) {
    out.sofa_logits.resize(cfg.n_channels);
    for (std::size_t c = 0; c < cfg.n_channels; ++c) {
      const Mat& head_in = cfg.multi_channel ? cc.h_last[c] : cc.h_last[0];
      linear_forward(head_in, params.at("sofa" + std::to_string(c) + ".W").value,
                     params.at("sofa" + std::to_string(c) + ".b").value, out.sofa_logits[c]);
    }
  }
  linear_forward(out.z, params.at("sepsis.W").value, params.at("sepsis.b").value, out.sepsis_logits);
}

double sofanet_local_loss(const ModelOutputs& out, std::span<const int> sepsis_labels,
                          std::span<const std::array<int, 4>> sofa_labels, const ModelConfig& cfg,
                          LossGrads& lg) {
  const std::size_t batch = out.sepsis_logits.rows;
  if (sepsis_labels.size() != batch) throw ShapeMismatch("sepsis label count");
  const double inv_b = 1.0 / static_cast<double>(batch);

  double loss = softmax_ce_rows(out.sepsis_logits, sepsis_labels, lg.dsepsis, inv_b);

  lg.dsofa.clear();
  if (cfg.sofa_heads) {
    if (sofa_labels.size() != batch) throw ShapeMismatch("sofa label count");
    lg.dsofa.resize(cfg.n_channels);
    std::vector<int> labels(batch);
    for (std::size_t c = 0; c < cfg.n_channels; ++c) {
      for (std::size_t b = 0; b < batch; ++b) labels[b] = sofa_labels[b][c];
      loss += cfg.alpha *
              softmax_ce_rows(out.sofa_logits[c], labels, lg.dsofa[c], cfg.alpha * inv_b);
    }
  }
  return loss;
}

void sofanet_backward(ParamSet& params, const ModelConfig& cfg, const std::vector<Mat>& xs,
                      const ModelCache& cache, const ModelOutputs& out, const LossGrads& lg,
                      const Mat* dz_extra) {
  const std::size_t batch = out.z.rows;
  const std::size_t T = xs.size();
  const std::size_t n_grus = cfg.multi_channel ? cfg.n_channels : 1;

  // dL/dz from the sepsis head (plus any external alignment gradient).
  Mat dz;
  dz.resize(batch, cfg.rep_dim());
  linear_backward(out.z, params.at("sepsis.W").value, lg.dsepsis, params.at("sepsis.W").grad,
                  params.at("sepsis.b").grad, &dz);
  if (dz_extra) {
    if (!dz_extra->same_shape(dz)) throw ShapeMismatch("dz_extra shape");
    for (std::size_t i = 0; i < dz.size(); ++i) dz.v[i] += dz_extra->v[i];
  }

  for (std::size_t c = 0; c < n_grus; ++c) {
    const std::size_t width = cfg.multi_channel ? cfg.hidden_dim : cfg.rep_dim();
    Mat dh(batch, width);
    const std::size_t off = cfg.multi_channel ? c * cfg.hidden_dim : 0;
    for (std::size_t b = 0; b < batch; ++b)
      std::copy(dz[b] + off, dz[b] + off + width, dh[b]);

    if (cfg.sofa_heads) {
      Mat dhead;
      if (cfg.multi_channel) {
        const std::string head = "sofa" + std::to_string(c);
        linear_backward(cache.h_last[c], params.at(head + ".W").value, lg.dsofa[c],
                        params.at(head + ".W").grad, params.at(head + ".b").grad, &dhead);
        for (std::size_t i = 0; i < dh.size(); ++i) dh.v[i] += dhead.v[i];
      } else {
        for (std::size_t hc = 0; hc < cfg.n_channels; ++hc) {
          const std::string head = "sofa" + std::to_string(hc);
          linear_backward(cache.h_last[0], params.at(head + ".W").value, lg.dsofa[hc],
                          params.at(head + ".W").grad, params.at(head + ".b").grad, &dhead);
          for (std::size_t i = 0; i < dh.size(); ++i) dh.v[i] += dhead.v[i];
        }
      }
    }

    std::vector<Mat> upstream(T);
    upstream[T - 1] = std::move(dh);
    const GruRefs w = gru_refs(params, channel_prefix(cfg, c));
    GruGradRefs g = gru_grad_refs(params, channel_prefix(cfg, c));
    gru_backward(cache.gru[c], upstream, w, g, nullptr);
  }
}

std::vector<double> predict_proba(const std::vector<WindowSample>& windows,
                                  std::span<const std::size_t> which, const Standardizer& st,
                                  const ParamSet& params, const ModelConfig& cfg) {
  std::vector<double> scores;
  scores.reserve(which.size());
  constexpr std::size_t kChunk = 512;
  std::vector<Mat> xs;
  ModelOutputs out;
  Mat probs;
  for (std::size_t pos = 0; pos < which.size(); pos += kChunk) {
    const std::size_t len = std::min(kChunk, which.size() - pos);
    tensorize_windows(windows, which.subspan(pos, len), st, xs);
    sofanet_forward(xs, params, cfg, out, nullptr);
    softmax_rows(out.sepsis_logits, probs);
    for (std::size_t b = 0; b < len; ++b) scores.push_back(probs[b][1]);
  }
  return scores;
}

}  // namespace sofanet
