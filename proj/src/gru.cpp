#include "sofanet/gru.hpp"

#include <cmath>

#include "sofanet/errors.hpp"

namespace sofanet {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void sigmoid_inplace(Mat& m) {
  for (double& x : m.v) x = sigmoid(x);
}

void tanh_inplace(Mat& m) {
  for (double& x : m.v) x = std::tanh(x);
}

// gate preactivation: x * W^T + s * U^T + b
void gate_preact(const Mat& x, const Mat& s, const Mat& W, const Mat& U, const Mat& b, Mat& out) {
  matmul_nt(x, W, out);
  Mat tmp;
  matmul_nt(s, U, tmp);
  for (std::size_t i = 0; i < out.size(); ++i) out.v[i] += tmp.v[i];
  add_row_broadcast(out, b);
}

}  // namespace

void add_gru_params(ParamSet& p, const std::string& prefix, std::size_t input_dim, std::size_t hidden_dim) {
  for (const char* gate : {"u", "r", "c"}) {
    p.add(prefix + "W" + gate, hidden_dim, input_dim);
    p.add(prefix + "U" + gate, hidden_dim, hidden_dim);
    p.add(prefix + "b" + gate, 1, hidden_dim);
  }
}

GruRefs gru_refs(const ParamSet& p, const std::string& prefix) {
  return GruRefs{&p.at(prefix + "Wu").value, &p.at(prefix + "Uu").value, &p.at(prefix + "bu").value,
                 &p.at(prefix + "Wr").value, &p.at(prefix + "Ur").value, &p.at(prefix + "br").value,
                 &p.at(prefix + "Wc").value, &p.at(prefix + "Uc").value, &p.at(prefix + "bc").value};
}

GruGradRefs gru_grad_refs(ParamSet& p, const std::string& prefix) {
  return GruGradRefs{&p.at(prefix + "Wu").grad, &p.at(prefix + "Uu").grad, &p.at(prefix + "bu").grad,
                     &p.at(prefix + "Wr").grad, &p.at(prefix + "Ur").grad, &p.at(prefix + "br").grad,
                     &p.at(prefix + "Wc").grad, &p.at(prefix + "Uc").grad, &p.at(prefix + "bc").grad};
}

Mat gru_cell_forward(const Mat& x, const Mat& h_prev, const GruRefs& w) {
  GruCache cache;
  gru_forward_seq({x}, h_prev, w, cache);
  return cache.h[1];
}

void gru_forward_seq(const std::vector<Mat>& xs, const Mat& h0, const GruRefs& w, GruCache& cache) {
  if (xs.empty()) throw ShapeMismatch("gru_forward_seq: empty sequence");
  const std::size_t hidden = w.Wu->rows;
  const std::size_t input = w.Wu->cols;
  const std::size_t batch = xs[0].rows;
  for (const Mat& x : xs)
    if (x.rows != batch || x.cols != input) throw ShapeMismatch("gru_forward_seq: input shape");
  if (h0.rows != 0 && (h0.rows != batch || h0.cols != hidden))
    throw ShapeMismatch("gru_forward_seq: h0 shape");

  const std::size_t T = xs.size();
  cache.x = xs;
  cache.h.assign(T + 1, Mat());
  cache.u.assign(T, Mat());
  cache.r.assign(T, Mat());
  cache.c.assign(T, Mat());
  cache.rh.assign(T, Mat());
  cache.h[0] = h0.rows ? h0 : Mat(batch, hidden);

  for (std::size_t t = 0; t < T; ++t) {
    const Mat& h_prev = cache.h[t];
    Mat& u = cache.u[t];
    Mat& r = cache.r[t];
    Mat& c = cache.c[t];
    Mat& rh = cache.rh[t];

    gate_preact(xs[t], h_prev, *w.Wu, *w.Uu, *w.bu, u);
    sigmoid_inplace(u);
    gate_preact(xs[t], h_prev, *w.Wr, *w.Ur, *w.br, r);
    sigmoid_inplace(r);

    rh.resize(batch, hidden);
    for (std::size_t i = 0; i < rh.size(); ++i) rh.v[i] = r.v[i] * h_prev.v[i];

    gate_preact(xs[t], rh, *w.Wc, *w.Uc, *w.bc, c);
    tanh_inplace(c);

    Mat& h = cache.h[t + 1];
    h.resize(batch, hidden);
    for (std::size_t i = 0; i < h.size(); ++i)
      h.v[i] = (1.0 - u.v[i]) * h_prev.v[i] + u.v[i] * c.v[i];
  }
}

void gru_backward(const GruCache& cache, const std::vector<Mat>& dh_upstream, const GruRefs& w,
                  GruGradRefs& g, std::vector<Mat>* dx) {
  const std::size_t T = cache.steps();
  if (dh_upstream.size() != T) throw ShapeMismatch("gru_backward: upstream gradient count");
  const std::size_t batch = cache.x[0].rows;
  const std::size_t hidden = w.Wu->rows;

  if (dx) {
    dx->assign(T, Mat());
  }

  Mat dh(batch, hidden);  // running dL/dh_t
  Mat da_u, da_r, da_c, drh;
  for (std::size_t ti = T; ti-- > 0;) {
    const Mat& up = dh_upstream[ti];
    if (up.rows) {
      if (!up.same_shape(dh)) throw ShapeMismatch("gru_backward: upstream gradient shape");
      for (std::size_t i = 0; i < dh.size(); ++i) dh.v[i] += up.v[i];
    }

    const Mat& h_prev = cache.h[ti];
    const Mat& u = cache.u[ti];
    const Mat& r = cache.r[ti];
    const Mat& c = cache.c[ti];
    const Mat& rh = cache.rh[ti];
    const Mat& x = cache.x[ti];

    Mat dh_prev(batch, hidden);
    da_u.resize(batch, hidden);
    da_c.resize(batch, hidden);
    for (std::size_t i = 0; i < dh.size(); ++i) {
      const double d = dh.v[i];
      dh_prev.v[i] = d * (1.0 - u.v[i]);
      const double dc = d * u.v[i];
      da_c.v[i] = dc * (1.0 - c.v[i] * c.v[i]);
      const double du = d * (c.v[i] - h_prev.v[i]);
      da_u.v[i] = du * u.v[i] * (1.0 - u.v[i]);
    }

    matmul_tn_acc(da_c, x, *g.Wc);
    matmul_tn_acc(da_c, rh, *g.Uc);
    add_col_sums(da_c, *g.bc);

    drh.resize(batch, hidden);
    drh.zero();
    matmul_nn_acc(da_c, *w.Uc, drh);
    da_r.resize(batch, hidden);
    for (std::size_t i = 0; i < drh.size(); ++i) {
      dh_prev.v[i] += drh.v[i] * r.v[i];
      const double dr = drh.v[i] * h_prev.v[i];
      da_r.v[i] = dr * r.v[i] * (1.0 - r.v[i]);
    }

    matmul_tn_acc(da_r, x, *g.Wr);
    matmul_tn_acc(da_r, h_prev, *g.Ur);
    add_col_sums(da_r, *g.br);
    matmul_nn_acc(da_r, *w.Ur, dh_prev);

    matmul_tn_acc(da_u, x, *g.Wu);
    matmul_tn_acc(da_u, h_prev, *g.Uu);
    add_col_sums(da_u, *g.bu);
    matmul_nn_acc(da_u, *w.Uu, dh_prev);

    if (dx) {
      Mat& dxt = (*dx)[ti];
      dxt.resize(batch, x.cols);
      matmul_nn_acc(da_u, *w.Wu, dxt);
      matmul_nn_acc(da_r, *w.Wr, dxt);
      matmul_nn_acc(da_c, *w.Wc, dxt);
    }

    dh = std::move(dh_prev);
  }
}

}  // namespace sofanet
