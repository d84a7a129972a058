#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sofanet/model.hpp"
#include "sofanet/protocol.hpp"
#include "sofanet/sampler.hpp"
#include "sofanet/train_config.hpp"

namespace sofanet {

// Everything one participant owns during training. Both parties start from
// the same seed-derived parameters; batch order is decorrelated per party.
struct PartyState {
  char role = 'a';  // 'a' or 'b'
  ModelConfig model_cfg;
  TrainConfig train_cfg;
  const std::vector<WindowSample>* windows = nullptr;
  Standardizer st;
  ParamSet params;
  AdamState adam;
  BatchSampler sampler{1, 1, 0};
  std::uint32_t round = 0;

  std::vector<double> local_loss_history;
  std::vector<double> mmd_history;
  std::vector<std::uint64_t> param_digests;  // FNV-1a64 of serialized params per round
};

PartyState make_party_state(char role, const TrainConfig& tc, const ModelConfig& mc,
                            const std::vector<WindowSample>& windows);

// HELLO exchange; throws ConfigMismatch when roles collide or hashes differ.
void hello_handshake(PartyState& ps, Channel& ch, const std::string& schema_hash,
                     const std::string& config_hash);

// One lockstep round: hidden exchange, joint loss, optimizer step, parameter
// averaging. After an averaging round both parties hold byte-identical
// parameters.
void run_round(PartyState& ps, Channel& ch);

// METRICS summary followed by BYE, both directions.
void farewell(PartyState& ps, Channel& ch);

struct PartyResult {
  ParamSet params;
  Standardizer st;
  std::vector<double> local_loss_history;
  std::vector<double> mmd_history;
  std::vector<std::uint64_t> param_digests;
};

// Full protocol run for one endpoint over an established channel.
PartyResult run_party(char role, const TrainConfig& tc, const ModelConfig& mc,
                      const std::vector<WindowSample>& windows, Channel& ch,
                      const std::string& schema_hash, const std::string& config_hash);

struct CollabResult {
  PartyResult a;
  PartyResult b;
};

// Runs both parties to completion. Transport::InProcess joins them with a
// queue pair; Transport::Stream runs a real localhost socket between two
// threads. Taps, when given, observe each endpoint's frames.
CollabResult train_collab(const TrainConfig& tc, const ModelConfig& mc,
                          const std::vector<WindowSample>& windows_a,
                          const std::vector<WindowSample>& windows_b,
                          std::shared_ptr<ChannelTap> tap_a = nullptr,
                          std::shared_ptr<ChannelTap> tap_b = nullptr,
                          std::uint16_t stream_port = 45111);

// The same loop without any exchange.
PartyResult train_local(const TrainConfig& tc, const ModelConfig& mc,
                        const std::vector<WindowSample>& windows);

// train_local on source, then a fresh optimizer on target; all layers stay
// trainable. The returned standardizer is the target stage's.
PartyResult finetune(const TrainConfig& tc, const ModelConfig& mc,
                     const std::vector<WindowSample>& source,
                     const std::vector<WindowSample>& target);

struct AuditViolation {
  std::size_t frame_index = 0;
  std::string reason;
};

struct AuditReport {
  bool pass = true;
  std::size_t frames_checked = 0;
  std::vector<AuditViolation> violations;
};

// PASS iff every frame kind is permitted, every HIDDEN_BATCH is rep_dim wide
// and no payload reproduces a raw window (as 6xF or 6x2F doubles) from
// either cohort.
AuditReport privacy_audit(const std::vector<TranscriptEntry>& transcript,
                          const std::vector<WindowSample>& windows_a,
                          const std::vector<WindowSample>& windows_b, const ModelConfig& cfg);

std::string audit_report_json(const AuditReport& report);

}  // namespace sofanet
