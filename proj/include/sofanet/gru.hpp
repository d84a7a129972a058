#pragma once

#include <string>
#include <vector>

#include "sofanet/mat.hpp"
#include "sofanet/params.hpp"

namespace sofanet {

// Gate convention:
//   u = sigmoid(W_u x + U_u h_prev + b_u)
//   r = sigmoid(W_r x + U_r h_prev + b_r)
//   c = tanh(W_c x + U_c (r .* h_prev) + b_c)
//   h = (1 - u) .* h_prev + u .* c
// W_*: hidden x input, U_*: hidden x hidden, b_*: 1 x hidden.

struct GruRefs {
  const Mat* Wu;
  const Mat* Uu;
  const Mat* bu;
  const Mat* Wr;
  const Mat* Ur;
  const Mat* br;
  const Mat* Wc;
  const Mat* Uc;
  const Mat* bc;
};

struct GruGradRefs {
  Mat* Wu;
  Mat* Uu;
  Mat* bu;
  Mat* Wr;
  Mat* Ur;
  Mat* br;
  Mat* Wc;
  Mat* Uc;
  Mat* bc;
};

// Adds the nine GRU tensors under `prefix` (e.g. "ch0.gru.") to `p`.
void add_gru_params(ParamSet& p, const std::string& prefix, std::size_t input_dim, std::size_t hidden_dim);

GruRefs gru_refs(const ParamSet& p, const std::string& prefix);
GruGradRefs gru_grad_refs(ParamSet& p, const std::string& prefix);

// Everything the backward pass needs, retained per step.
struct GruCache {
  std::vector<Mat> x;   // T inputs, batch x input
  std::vector<Mat> h;   // T+1 states, h[0] = h0
  std::vector<Mat> u;   // update gate
  std::vector<Mat> r;   // reset gate
  std::vector<Mat> c;   // candidate
  std::vector<Mat> rh;  // r .* h_prev
  std::size_t steps() const { return x.size(); }
};

// Single step, no cache. x: batch x input, h_prev: batch x hidden.
Mat gru_cell_forward(const Mat& x, const Mat& h_prev, const GruRefs& w);

// Full sequence; h0 all zeros when h0.rows == 0.
void gru_forward_seq(const std::vector<Mat>& xs, const Mat& h0, const GruRefs& w, GruCache& cache);

// dh_upstream[t] is dL/dh_{t+1} (may be empty mats for steps with no loss).
// Parameter gradients accumulate into g; input gradients land in dx when
// non-null (resized to match).
void gru_backward(const GruCache& cache, const std::vector<Mat>& dh_upstream, const GruRefs& w,
                  GruGradRefs& g, std::vector<Mat>* dx);

}  // namespace sofanet
