#include "sofanet/collab.hpp"

#include <cstring>
#include <exception>
#include <thread>
#include <unordered_set>

#include "json.hpp"
#include "sofanet/errors.hpp"
#include "sofanet/rng.hpp"

namespace sofanet {

namespace {

constexpr int kProtocolVersion = 1;

std::uint64_t params_digest(const ParamSet& p) {
  const std::vector<std::uint8_t> bytes = serialize_params(p);
  return fnv1a64_bytes(bytes.data(), bytes.size());
}

Frame expect_frame(Channel& ch, MsgKind kind, std::uint32_t round) {
  Frame f = ch.recv();
  if (f.kind != kind)
    throw ConfigMismatch(std::string("expected ") + msg_kind_name(kind) + ", received " +
                         msg_kind_name(f.kind));
  if (f.round != round)
    throw RoundDesync("peer is at round " + std::to_string(f.round) + ", local round is " +
                      std::to_string(round));
  return f;
}

void gather_batch(const PartyState& ps, const std::vector<std::size_t>& idx, std::vector<Mat>& xs,
                  std::vector<int>& sepsis, std::vector<std::array<int, 4>>& sofa) {
  tensorize_windows(*ps.windows, idx, ps.st, xs);
  sepsis.resize(idx.size());
  sofa.resize(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    sepsis[i] = (*ps.windows)[idx[i]].sepsis_label;
    sofa[i] = (*ps.windows)[idx[i]].sofa_labels;
  }
}

// One local optimizer step; shared by the local loop and the collaborative
// round (which passes the alignment gradient through dz_extra).
double local_step(PartyState& ps, const std::vector<Mat>& xs, const std::vector<int>& sepsis,
                  const std::vector<std::array<int, 4>>& sofa, const ModelOutputs& out,
                  const ModelCache& cache, const Mat* dz_extra, double precomputed_loss,
                  LossGrads& lg) {
  ps.params.zero_grad();
  sofanet_backward(ps.params, ps.model_cfg, xs, cache, out, lg, dz_extra);
  adam_step(ps.params, ps.params.flatten_grad(), ps.adam);
  return precomputed_loss;
}

std::vector<std::uint8_t> json_payload(const nlohmann::json& j) {
  const std::string s = j.dump();
  return std::vector<std::uint8_t>(s.begin(), s.end());
}

}  // namespace

void TrainConfig::validate() const {
  if (rounds < 1) throw ConfigInvalid("rounds must be at least 1");
  if (batch_size < 2) throw ConfigInvalid("batch_size must be at least 2");
  if (!(lr > 0.0)) throw ConfigInvalid("learning rate must be positive");
  if (lambda < 0.0) throw ConfigInvalid("lambda must be non-negative");
  if (avg_every < 1) throw ConfigInvalid("avg_every must be at least 1");
}

PartyState make_party_state(char role, const TrainConfig& tc, const ModelConfig& mc,
                            const std::vector<WindowSample>& windows) {
  tc.validate();
  if (windows.empty()) throw EmptyResult("party has no training windows");
  PartyState ps;
  ps.role = role;
  ps.model_cfg = mc;
  ps.model_cfg.alpha = tc.alpha;
  ps.train_cfg = tc;
  ps.windows = &windows;
  ps.st = fit_standardizer(windows);
  ps.params = make_sofanet_params(ps.model_cfg, tc.seed);
  ps.adam = AdamState(ps.params.total_size(), tc.lr);
  const std::uint64_t party_id = (role == 'a') ? 0 : 1;
  ps.sampler = BatchSampler(windows.size(), tc.batch_size, tc.seed ^ party_id);
  return ps;
}

void hello_handshake(PartyState& ps, Channel& ch, const std::string& schema_hash,
                     const std::string& config_hash) {
  nlohmann::json j;
  j["role"] = std::string(1, ps.role);
  j["schema_hash"] = schema_hash;
  j["config_hash"] = config_hash;
  j["protocol_version"] = kProtocolVersion;
  ch.send(Frame{MsgKind::Hello, 0, json_payload(j)});

  Frame f = ch.recv();
  if (f.kind != MsgKind::Hello) throw ConfigMismatch("peer did not open with HELLO");
  const auto peer = nlohmann::json::parse(f.payload.begin(), f.payload.end());
  if (peer.value("protocol_version", -1) != kProtocolVersion)
    throw ConfigMismatch("peer speaks a different protocol version");
  if (peer.value("role", "") == std::string(1, ps.role))
    throw ConfigMismatch("both endpoints claim role " + std::string(1, ps.role));
  if (peer.value("schema_hash", "") != schema_hash)
    throw ConfigMismatch("peer schema hash differs");
  if (peer.value("config_hash", "") != config_hash)
    throw ConfigMismatch("peer config hash differs");
}

void run_round(PartyState& ps, Channel& ch) {
  const TrainConfig& tc = ps.train_cfg;
  const std::vector<std::size_t> idx = ps.sampler.next();
  std::vector<Mat> xs;
  std::vector<int> sepsis;
  std::vector<std::array<int, 4>> sofa;
  gather_batch(ps, idx, xs, sepsis, sofa);

  ModelOutputs out;
  ModelCache cache;
  sofanet_forward(xs, ps.params, ps.model_cfg, out, &cache);

  ch.send(Frame{MsgKind::HiddenBatch, ps.round, encode_matrix(out.z)});

  LossGrads lg;
  const double local = sofanet_local_loss(out, sepsis, sofa, ps.model_cfg, lg);

  const Frame peer = expect_frame(ch, MsgKind::HiddenBatch, ps.round);
  const Mat z_remote = decode_matrix(peer.payload);

  Mat dz_extra;
  bool have_dz = false;
  double mmd_val = 0.0;
  if (tc.use_mmd && tc.lambda > 0.0) {
    // Canonical batch order (party a first) keeps the pooled bandwidth and
    // the loss value identical on both sides.
    const Mat& z1 = ps.role == 'a' ? out.z : z_remote;
    const Mat& z2 = ps.role == 'a' ? z_remote : out.z;
    std::vector<double> bw;
    if (tc.mmd_kind == MmdKind::Rbf) bw = bandwidth_ladder(median_heuristic(z1, z2));
    mmd_val = tc.mmd_kind == MmdKind::Rbf ? mmd_rbf(z1, z2, bw) : mmd_linear(z1, z2);

    Mat d1, d2;
    mmd_backward(z1, z2, tc.mmd_kind, bw, d1, d2);
    Mat& d_mine = ps.role == 'a' ? d1 : d2;
    Mat& d_theirs = ps.role == 'a' ? d2 : d1;
    for (double& v : d_mine.v) v *= tc.lambda;
    dz_extra = std::move(d_mine);
    have_dz = true;

    if (tc.grad_exchange) {
      for (double& v : d_theirs.v) v *= tc.lambda;
      ch.send(Frame{MsgKind::HiddenGrad, ps.round, encode_matrix(d_theirs)});
      const Frame gf = expect_frame(ch, MsgKind::HiddenGrad, ps.round);
      const Mat g_recv = decode_matrix(gf.payload);
      if (!g_recv.same_shape(dz_extra)) throw ShapeMismatch("HIDDEN_GRAD shape differs from local batch");
      for (std::size_t i = 0; i < dz_extra.size(); ++i) dz_extra.v[i] += g_recv.v[i];
    }
  }

  local_step(ps, xs, sepsis, sofa, out, cache, have_dz ? &dz_extra : nullptr, local, lg);

  if ((ps.round + 1) % tc.avg_every == 0) {
    ch.send(Frame{MsgKind::Params, ps.round, serialize_params(ps.params)});
    const Frame pf = expect_frame(ch, MsgKind::Params, ps.round);
    const ParamSet theirs = deserialize_params(pf.payload, ps.params);
    ps.params = param_average(ps.params, theirs);
  }

  ps.local_loss_history.push_back(local);
  ps.mmd_history.push_back(mmd_val);
  ps.param_digests.push_back(params_digest(ps.params));
  ps.round += 1;
}

void farewell(PartyState& ps, Channel& ch) {
  nlohmann::json j;
  j["rounds"] = ps.round;
  j["final_local_loss"] = ps.local_loss_history.empty() ? 0.0 : ps.local_loss_history.back();
  j["final_mmd"] = ps.mmd_history.empty() ? 0.0 : ps.mmd_history.back();
  ch.send(Frame{MsgKind::Metrics, ps.round, json_payload(j)});
  Frame f = ch.recv();
  if (f.kind != MsgKind::Metrics) throw ConfigMismatch("expected METRICS before BYE");
  ch.send(Frame{MsgKind::Bye, ps.round, {}});
  f = ch.recv();
  if (f.kind != MsgKind::Bye) throw ConfigMismatch("expected BYE");
}

PartyResult run_party(char role, const TrainConfig& tc, const ModelConfig& mc,
                      const std::vector<WindowSample>& windows, Channel& ch,
                      const std::string& schema_hash, const std::string& config_hash) {
  PartyState ps = make_party_state(role, tc, mc, windows);
  hello_handshake(ps, ch, schema_hash, config_hash);
  for (std::size_t r = 0; r < tc.rounds; ++r) run_round(ps, ch);
  farewell(ps, ch);
  return PartyResult{std::move(ps.params), std::move(ps.st), std::move(ps.local_loss_history),
                     std::move(ps.mmd_history), std::move(ps.param_digests)};
}

CollabResult train_collab(const TrainConfig& tc, const ModelConfig& mc,
                          const std::vector<WindowSample>& windows_a,
                          const std::vector<WindowSample>& windows_b,
                          std::shared_ptr<ChannelTap> tap_a, std::shared_ptr<ChannelTap> tap_b,
                          std::uint16_t stream_port) {
  tc.validate();
  const std::string schema_hash = standard_schema().schema_hash();
  const std::string config_hash = "local";  // both parties share tc by construction

  CollabResult result;
  std::exception_ptr err_a, err_b;

  auto party_main = [&](char role, const std::vector<WindowSample>& w, Channel& ch,
                        PartyResult& out, std::exception_ptr& err) {
    try {
      out = run_party(role, tc, mc, w, ch, schema_hash, config_hash);
    } catch (...) {
      err = std::current_exception();
    }
  };

  if (tc.transport == Transport::InProcess) {
    auto [ch_a, ch_b] = make_inproc_pair();
    if (tap_a) ch_a->attach_tap(tap_a);
    if (tap_b) ch_b->attach_tap(tap_b);
    std::thread ta(party_main, 'a', std::cref(windows_a), std::ref(*ch_a), std::ref(result.a),
                   std::ref(err_a));
    std::thread tb(party_main, 'b', std::cref(windows_b), std::ref(*ch_b), std::ref(result.b),
                   std::ref(err_b));
    ta.join();
    tb.join();
  } else {
    std::unique_ptr<Channel> ch_a, ch_b;
    std::thread listener([&] { ch_a = listen_channel("127.0.0.1", stream_port); });
    ch_b = connect_channel("127.0.0.1", stream_port);
    listener.join();
    if (tap_a) ch_a->attach_tap(tap_a);
    if (tap_b) ch_b->attach_tap(tap_b);
    std::thread ta(party_main, 'a', std::cref(windows_a), std::ref(*ch_a), std::ref(result.a),
                   std::ref(err_a));
    std::thread tb(party_main, 'b', std::cref(windows_b), std::ref(*ch_b), std::ref(result.b),
                   std::ref(err_b));
    ta.join();
    tb.join();
  }

  if (err_a) std::rethrow_exception(err_a);
  if (err_b) std::rethrow_exception(err_b);
  return result;
}

PartyResult train_local(const TrainConfig& tc, const ModelConfig& mc,
                        const std::vector<WindowSample>& windows) {
  PartyState ps = make_party_state('a', tc, mc, windows);
  for (std::size_t r = 0; r < tc.rounds; ++r) {
    const std::vector<std::size_t> idx = ps.sampler.next();
    std::vector<Mat> xs;
    std::vector<int> sepsis;
    std::vector<std::array<int, 4>> sofa;
    gather_batch(ps, idx, xs, sepsis, sofa);

    ModelOutputs out;
    ModelCache cache;
    sofanet_forward(xs, ps.params, ps.model_cfg, out, &cache);
    LossGrads lg;
    const double local = sofanet_local_loss(out, sepsis, sofa, ps.model_cfg, lg);
    local_step(ps, xs, sepsis, sofa, out, cache, nullptr, local, lg);

    ps.local_loss_history.push_back(local);
    ps.mmd_history.push_back(0.0);
    ps.param_digests.push_back(params_digest(ps.params));
  }
  return PartyResult{std::move(ps.params), std::move(ps.st), std::move(ps.local_loss_history),
                     std::move(ps.mmd_history), std::move(ps.param_digests)};
}

PartyResult finetune(const TrainConfig& tc, const ModelConfig& mc,
                     const std::vector<WindowSample>& source,
                     const std::vector<WindowSample>& target) {
  PartyResult stage1 = train_local(tc, mc, source);

  PartyState ps = make_party_state('a', tc, mc, target);
  ps.params = std::move(stage1.params);             // continue from the source model
  ps.adam = AdamState(ps.params.total_size(), tc.lr);  // fresh optimizer
  ps.sampler = BatchSampler(target.size(), tc.batch_size, derive_seed(tc.seed, 0x66746eu));

  for (std::size_t r = 0; r < tc.rounds; ++r) {
    const std::vector<std::size_t> idx = ps.sampler.next();
    std::vector<Mat> xs;
    std::vector<int> sepsis;
    std::vector<std::array<int, 4>> sofa;
    gather_batch(ps, idx, xs, sepsis, sofa);

    ModelOutputs out;
    ModelCache cache;
    sofanet_forward(xs, ps.params, ps.model_cfg, out, &cache);
    LossGrads lg;
    const double local = sofanet_local_loss(out, sepsis, sofa, ps.model_cfg, lg);
    local_step(ps, xs, sepsis, sofa, out, cache, nullptr, local, lg);

    stage1.local_loss_history.push_back(local);
    stage1.mmd_history.push_back(0.0);
    stage1.param_digests.push_back(params_digest(ps.params));
  }
  stage1.params = std::move(ps.params);
  stage1.st = std::move(ps.st);
  return stage1;
}

namespace {

void window_byte_forms(const WindowSample& w, std::string& x_form, std::string& xdx_form) {
  x_form.assign(reinterpret_cast<const char*>(w.x.v.data()), w.x.size() * sizeof(double));
  xdx_form.clear();
  xdx_form.reserve(2 * w.x.size() * sizeof(double));
  for (std::size_t t = 0; t < w.x.rows; ++t) {
    xdx_form.append(reinterpret_cast<const char*>(w.x[t]), w.x.cols * sizeof(double));
    xdx_form.append(reinterpret_cast<const char*>(w.dx[t]), w.dx.cols * sizeof(double));
  }
}

}  // namespace

AuditReport privacy_audit(const std::vector<TranscriptEntry>& transcript,
                          const std::vector<WindowSample>& windows_a,
                          const std::vector<WindowSample>& windows_b, const ModelConfig& cfg) {
  AuditReport report;
  std::unordered_set<std::string> raw_forms;
  std::string x_form, xdx_form;
  for (const auto* windows : {&windows_a, &windows_b}) {
    for (const WindowSample& w : *windows) {
      window_byte_forms(w, x_form, xdx_form);
      raw_forms.insert(x_form);
      raw_forms.insert(xdx_form);
    }
  }

  auto matches_raw_window = [&](const std::uint8_t* data, std::size_t len) {
    if (raw_forms.empty()) return false;
    const std::string probe(reinterpret_cast<const char*>(data), len);
    return raw_forms.count(probe) > 0;
  };

  for (std::size_t i = 0; i < transcript.size(); ++i) {
    const Frame& f = transcript[i].frame;
    ++report.frames_checked;

    if (!is_known_kind(static_cast<std::uint8_t>(f.kind))) {
      report.violations.push_back({i, "frame kind outside the permitted set"});
      continue;
    }

    if (f.kind == MsgKind::HiddenBatch || f.kind == MsgKind::HiddenGrad) {
      if (f.payload.size() < 8) {
        report.violations.push_back({i, std::string(msg_kind_name(f.kind)) + " payload too short"});
        continue;
      }
      std::uint32_t rows = 0, cols = 0;
      std::memcpy(&rows, f.payload.data(), 4);
      std::memcpy(&cols, f.payload.data() + 4, 4);
      if (f.kind == MsgKind::HiddenBatch && cols != cfg.rep_dim()) {
        report.violations.push_back(
            {i, "HIDDEN_BATCH width " + std::to_string(cols) + ", hidden representation is " +
                    std::to_string(cfg.rep_dim())});
      }
      // matrix body scanned below along with the whole payload
      if (f.payload.size() > 8 && matches_raw_window(f.payload.data() + 8, f.payload.size() - 8)) {
        report.violations.push_back({i, "matrix body reproduces a raw window"});
      }
    }

    if (!f.payload.empty() && matches_raw_window(f.payload.data(), f.payload.size())) {
      report.violations.push_back({i, "payload reproduces a raw window"});
    }
  }

  report.pass = report.violations.empty();
  return report;
}

std::string audit_report_json(const AuditReport& report) {
  nlohmann::json j;
  j["pass"] = report.pass;
  j["frames_checked"] = report.frames_checked;
  nlohmann::json v = nlohmann::json::array();
  for (const auto& viol : report.violations)
    v.push_back({{"frame_index", viol.frame_index}, {"reason", viol.reason}});
  j["violations"] = v;
  return j.dump(2);
}

}  // namespace sofanet
