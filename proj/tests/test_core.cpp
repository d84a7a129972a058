#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "sofanet/errors.hpp"
#include "sofanet/gru.hpp"
#include "sofanet/nn_ops.hpp"
#include "sofanet/params.hpp"
#include "testutil.hpp"

using namespace sofanet;

namespace {

// Scalar re-implementation of the cell, deliberately loop-by-loop and
// independent of the Mat kernels.
std::vector<double> gru_cell_oracle(const std::vector<double>& x, const std::vector<double>& h_prev,
                                    const ParamSet& p, const std::string& prefix) {
  const Mat& Wu = p.at(prefix + "Wu").value;
  const Mat& Uu = p.at(prefix + "Uu").value;
  const Mat& bu = p.at(prefix + "bu").value;
  const Mat& Wr = p.at(prefix + "Wr").value;
  const Mat& Ur = p.at(prefix + "Ur").value;
  const Mat& br = p.at(prefix + "br").value;
  const Mat& Wc = p.at(prefix + "Wc").value;
  const Mat& Uc = p.at(prefix + "Uc").value;
  const Mat& bc = p.at(prefix + "bc").value;
  const std::size_t H = Wu.rows, D = Wu.cols;

  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  std::vector<double> u(H), r(H), c(H), h(H);
  for (std::size_t i = 0; i < H; ++i) {
    double au = bu[0][i], ar = br[0][i];
    for (std::size_t j = 0; j < D; ++j) {
      au += Wu[i][j] * x[j];
      ar += Wr[i][j] * x[j];
    }
    for (std::size_t j = 0; j < H; ++j) {
      au += Uu[i][j] * h_prev[j];
      ar += Ur[i][j] * h_prev[j];
    }
    u[i] = sig(au);
    r[i] = sig(ar);
  }
  for (std::size_t i = 0; i < H; ++i) {
    double ac = bc[0][i];
    for (std::size_t j = 0; j < D; ++j) ac += Wc[i][j] * x[j];
    for (std::size_t j = 0; j < H; ++j) ac += Uc[i][j] * (r[j] * h_prev[j]);
    c[i] = std::tanh(ac);
    h[i] = (1.0 - u[i]) * h_prev[i] + u[i] * c[i];
  }
  return h;
}

ParamSet make_gru(std::size_t input, std::size_t hidden) {
  ParamSet p;
  add_gru_params(p, "g.", input, hidden);
  return p;
}

}  // namespace

TEST_CASE("gru cell: zero parameters and zero state give zero output") {
  ParamSet p = make_gru(3, 4);
  Mat x(1, 3), h0(1, 4);
  x[0][0] = 0.7;
  x[0][1] = -0.2;
  const Mat h = gru_cell_forward(x, h0, gru_refs(p, "g."));
  for (double v : h.v) CHECK(v == 0.0);
}

TEST_CASE("gru cell: saturated update gate freezes the state") {
  ParamSet p = make_gru(3, 4);
  std::mt19937_64 rng(7);
  testutil::randomize(p, rng);
  for (double& v : p.at("g.bu").value.v) v = -50.0;  // u ~ 0
  Mat x(1, 3), h0(1, 4);
  testutil::fill_uniform(x, rng);
  testutil::fill_uniform(h0, rng);
  const Mat h = gru_cell_forward(x, h0, gru_refs(p, "g."));
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::fabs(h[0][i] - h0[0][i]) < 1e-15);
}

TEST_CASE("gru cell matches the scalar oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    ParamSet p = make_gru(3, 3);
    testutil::randomize(p, rng);
    Mat x(1, 3), h0(1, 3);
    testutil::fill_uniform(x, rng);
    testutil::fill_uniform(h0, rng);
    const Mat h = gru_cell_forward(x, h0, gru_refs(p, "g."));
    const std::vector<double> want =
        gru_cell_oracle({x[0][0], x[0][1], x[0][2]}, {h0[0][0], h0[0][1], h0[0][2]}, p, "g.");
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::fabs(h[0][i] - want[i]) < 1e-12);
  }
}

TEST_CASE("gru sequence: T=1 equals a single cell call") {
  std::mt19937_64 rng(13);
  ParamSet p = make_gru(5, 4);
  testutil::randomize(p, rng);
  Mat x(2, 5), h0(2, 4);
  testutil::fill_uniform(x, rng);
  testutil::fill_uniform(h0, rng);
  GruCache cache;
  gru_forward_seq({x}, h0, gru_refs(p, "g."), cache);
  const Mat single = gru_cell_forward(x, h0, gru_refs(p, "g."));
  for (std::size_t i = 0; i < single.size(); ++i) CHECK(cache.h[1].v[i] == single.v[i]);
}

TEST_CASE("gru sequence: zero inputs and zero parameters stay at the fixed point") {
  ParamSet p = make_gru(3, 4);
  std::vector<Mat> xs(6, Mat(2, 3));
  GruCache cache;
  gru_forward_seq(xs, Mat(), gru_refs(p, "g."), cache);
  for (const Mat& h : cache.h)
    for (double v : h.v) CHECK(v == 0.0);
}

TEST_CASE("gru sequence matches step-by-step scalar oracle at T=6") {
  std::mt19937_64 rng(17);
  ParamSet p = make_gru(3, 3);
  testutil::randomize(p, rng);
  std::vector<Mat> xs(6, Mat(1, 3));
  for (auto& x : xs) testutil::fill_uniform(x, rng);
  GruCache cache;
  gru_forward_seq(xs, Mat(), gru_refs(p, "g."), cache);

  std::vector<double> h(3, 0.0);
  for (std::size_t t = 0; t < 6; ++t)
    h = gru_cell_oracle({xs[t][0][0], xs[t][0][1], xs[t][0][2]}, h, p, "g.");
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::fabs(cache.h[6][0][i] - h[i]) < 1e-12);
}

TEST_CASE("gru backward: zero upstream gradient gives zero parameter gradients") {
  std::mt19937_64 rng(19);
  ParamSet p = make_gru(4, 4);
  testutil::randomize(p, rng);
  std::vector<Mat> xs(3, Mat(2, 4));
  for (auto& x : xs) testutil::fill_uniform(x, rng);
  GruCache cache;
  gru_forward_seq(xs, Mat(), gru_refs(p, "g."), cache);
  std::vector<Mat> upstream(3);  // all empty
  GruGradRefs g = gru_grad_refs(p, "g.");
  gru_backward(cache, upstream, gru_refs(p, "g."), g, nullptr);
  for (double v : p.flatten_grad()) CHECK(v == 0.0);
}

TEST_CASE("gru backward passes finite-difference checks (params and inputs)") {
  std::mt19937_64 rng(23);
  const std::size_t T = 6, dim = 4, hidden = 4, batch = 2;
  ParamSet p = make_gru(dim, hidden);
  testutil::randomize(p, rng);
  std::vector<Mat> xs(T, Mat(batch, dim));
  for (auto& x : xs) testutil::fill_uniform(x, rng);
  // loss = weighted sum of every h_t so all steps get upstream gradients
  std::vector<Mat> weights(T, Mat(batch, hidden));
  for (auto& w : weights) testutil::fill_uniform(w, rng);

  auto loss_value = [&] {
    GruCache cache;
    gru_forward_seq(xs, Mat(), gru_refs(p, "g."), cache);
    double s = 0.0;
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t i = 0; i < weights[t].size(); ++i) s += weights[t].v[i] * cache.h[t + 1].v[i];
    return s;
  };
  std::vector<Mat> dx;
  auto compute_grads = [&] {
    p.zero_grad();
    GruCache cache;
    gru_forward_seq(xs, Mat(), gru_refs(p, "g."), cache);
    GruGradRefs g = gru_grad_refs(p, "g.");
    gru_backward(cache, weights, gru_refs(p, "g."), g, &dx);
  };
  CHECK(testutil::fd_check_params(p, loss_value, compute_grads) < 1e-5);
  for (std::size_t t = 0; t < T; ++t)
    CHECK(testutil::fd_check_mat(xs[t], dx[t], loss_value) < 1e-5);
}

TEST_CASE("gru backward: duplicated batch doubles the parameter gradient") {
  std::mt19937_64 rng(29);
  ParamSet p = make_gru(3, 3);
  testutil::randomize(p, rng);
  Mat x1(1, 3);
  testutil::fill_uniform(x1, rng);
  Mat x2(2, 3);
  std::copy(x1[0], x1[0] + 3, x2[0]);
  std::copy(x1[0], x1[0] + 3, x2[1]);

  auto run = [&](const Mat& x, std::size_t batch) {
    p.zero_grad();
    GruCache cache;
    gru_forward_seq({x}, Mat(), gru_refs(p, "g."), cache);
    std::vector<Mat> up(1, Mat(batch, 3, 1.0));
    GruGradRefs g = gru_grad_refs(p, "g.");
    gru_backward(cache, up, gru_refs(p, "g."), g, nullptr);
    return p.flatten_grad();
  };
  const std::vector<double> g1 = run(x1, 1);
  const std::vector<double> g2 = run(x2, 2);
  for (std::size_t i = 0; i < g1.size(); ++i) CHECK(std::fabs(g2[i] - 2.0 * g1[i]) < 1e-12);
}

TEST_CASE("linear: identity weight and zero bias reproduce the input") {
  Mat x(2, 3), W(3, 3), b(1, 3), y;
  std::mt19937_64 rng(31);
  testutil::fill_uniform(x, rng);
  for (std::size_t i = 0; i < 3; ++i) W[i][i] = 1.0;
  linear_forward(x, W, b, y);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y.v[i] == x.v[i]);
}

TEST_CASE("linear backward: finite differences and bias column sums") {
  std::mt19937_64 rng(37);
  ParamSet p;
  p.add("W", 3, 5);
  p.add("b", 1, 3);
  testutil::randomize(p, rng);
  Mat x(4, 5), dy(4, 3);
  testutil::fill_uniform(x, rng);
  testutil::fill_uniform(dy, rng);

  auto loss_value = [&] {
    Mat y;
    linear_forward(x, p.at("W").value, p.at("b").value, y);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += dy.v[i] * y.v[i];
    return s;
  };
  auto compute_grads = [&] {
    p.zero_grad();
    linear_backward(x, p.at("W").value, dy, p.at("W").grad, p.at("b").grad, nullptr);
  };
  CHECK(testutil::fd_check_params(p, loss_value, compute_grads) < 1e-8);

  compute_grads();
  for (std::size_t j = 0; j < 3; ++j) {
    double want = 0.0;
    for (std::size_t i = 0; i < 4; ++i) want += dy[i][j];
    CHECK(p.at("b").grad[0][j] == doctest::Approx(want).epsilon(1e-14));
  }
}

TEST_CASE("softmax cross entropy: uniform logits give ln K") {
  std::vector<double> logits(7, 1.3), dl(7);
  const double loss = softmax_cross_entropy(logits, 2, dl);
  CHECK(loss == doctest::Approx(std::log(7.0)).epsilon(1e-12));
}

TEST_CASE("softmax cross entropy: extreme logits stay finite") {
  std::vector<double> logits = {1000.0, 0.0}, dl(2);
  const double loss = softmax_cross_entropy(logits, 0, dl);
  CHECK(std::isfinite(loss));
  CHECK(loss < 1e-300);
  CHECK(std::fabs(dl[0]) < 1e-300);
}

TEST_CASE("softmax cross entropy matches an extended-precision oracle") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> dist(-4.0, 4.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> logits(5), dl(5);
    for (double& v : logits) v = dist(rng);
    const std::size_t label = trial % 5;
    const double loss = softmax_cross_entropy(logits, label, dl);

    long double denom = 0.0L;
    for (double v : logits) denom += std::exp(static_cast<long double>(v));
    const long double want = std::log(denom) - static_cast<long double>(logits[label]);
    CHECK(std::fabs(loss - static_cast<double>(want)) < 1e-12);
    for (std::size_t i = 0; i < 5; ++i) {
      const long double p = std::exp(static_cast<long double>(logits[i])) / denom;
      const long double grad = p - (i == label ? 1.0L : 0.0L);
      CHECK(std::fabs(dl[i] - static_cast<double>(grad)) < 1e-12);
    }
  }
}

TEST_CASE("softmax cross entropy rejects out-of-range labels") {
  std::vector<double> logits(3), dl(3);
  CHECK_THROWS_AS(softmax_cross_entropy(logits, 3, dl), LabelOutOfRange);
}

TEST_CASE("adam: zero gradient leaves parameters untouched") {
  ParamSet p;
  p.add("w", 2, 2);
  std::mt19937_64 rng(43);
  testutil::randomize(p, rng);
  const std::vector<double> before = p.flatten();
  AdamState st(p.total_size());
  adam_step(p, std::vector<double>(4, 0.0), st);
  const std::vector<double> after = p.flatten();
  for (std::size_t i = 0; i < 4; ++i) CHECK(before[i] == after[i]);
}

TEST_CASE("adam: first bias-corrected step has magnitude lr/(1+eps)") {
  ParamSet p;
  p.add("w", 1, 1);
  AdamState st(1);
  adam_step(p, std::vector<double>{1.0}, st);
  CHECK(p.items[0].value[0][0] == doctest::Approx(-1e-3 / (1.0 + 1e-8)).epsilon(1e-12));
}

TEST_CASE("adam: loss on a quadratic decreases monotonically") {
  ParamSet p;
  p.add("w", 1, 1);
  p.items[0].value[0][0] = 3.0;
  AdamState st(1, 0.05);
  double prev = 9.0;
  for (int step = 0; step < 10; ++step) {
    const double w = p.items[0].value[0][0];
    adam_step(p, std::vector<double>{2.0 * w}, st);
    const double loss = p.items[0].value[0][0] * p.items[0].value[0][0];
    CHECK(loss < prev);
    prev = loss;
  }
}

TEST_CASE("adam rejects mismatched gradient lengths") {
  ParamSet p;
  p.add("w", 2, 2);
  AdamState st(4);
  CHECK_THROWS_AS(adam_step(p, std::vector<double>(3, 0.0), st), LengthMismatch);
}

TEST_CASE("parameter serialization round-trips bit-exactly, NaN and Inf included") {
  std::mt19937_64 rng(47);
  ParamSet p;
  p.add("alpha", 3, 4);
  p.add("beta", 1, 5);
  testutil::randomize(p, rng);
  p.at("alpha").value[1][2] = std::numeric_limits<double>::quiet_NaN();
  p.at("beta").value[0][0] = std::numeric_limits<double>::infinity();
  p.at("beta").value[0][1] = -std::numeric_limits<double>::infinity();

  const auto bytes = serialize_params(p);
  const ParamSet q = deserialize_params(bytes, p);
  const auto b2 = serialize_params(q);
  REQUIRE(bytes.size() == b2.size());
  CHECK(std::equal(bytes.begin(), bytes.end(), b2.begin()));
}

TEST_CASE("deserialization rejects shuffled manifests and truncated payloads") {
  ParamSet p;
  p.add("first", 2, 2);
  p.add("second", 2, 2);
  const auto bytes = serialize_params(p);

  ParamSet shuffled;
  shuffled.add("second", 2, 2);
  shuffled.add("first", 2, 2);
  CHECK_THROWS_AS(deserialize_params(bytes, shuffled), ManifestMismatch);

  std::vector<std::uint8_t> cut(bytes.begin(), bytes.end() - 8);
  CHECK_THROWS_AS(deserialize_params(cut, p), TruncatedPayload);
}

TEST_CASE("parameter averaging: equal, opposite and idempotent cases") {
  std::mt19937_64 rng(53);
  ParamSet p;
  p.add("w", 2, 3);
  testutil::randomize(p, rng);

  const ParamSet same = param_average(p, p);
  for (std::size_t i = 0; i < p.items[0].value.size(); ++i)
    CHECK(same.items[0].value.v[i] == p.items[0].value.v[i]);

  ParamSet neg;
  neg.add("w", 2, 3);
  for (std::size_t i = 0; i < p.items[0].value.size(); ++i)
    neg.items[0].value.v[i] = -p.items[0].value.v[i];
  const ParamSet zero = param_average(p, neg);
  for (double v : zero.items[0].value.v) CHECK(v == 0.0);

  const ParamSet avg = param_average(p, neg);
  const ParamSet fixed = param_average(avg, avg);
  for (std::size_t i = 0; i < avg.items[0].value.size(); ++i)
    CHECK(fixed.items[0].value.v[i] == avg.items[0].value.v[i]);
}

TEST_CASE("flatten/unflatten round-trips") {
  std::mt19937_64 rng(59);
  ParamSet p;
  p.add("a", 2, 3);
  p.add("b", 1, 4);
  testutil::randomize(p, rng);
  const std::vector<double> flat = p.flatten();
  ParamSet q;
  q.add("a", 2, 3);
  q.add("b", 1, 4);
  q.unflatten(flat);
  CHECK(q.flatten() == flat);
}
