#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sofanet/mat.hpp"

namespace sofanet {

// One learnable tensor with its gradient accumulator.
struct NamedTensor {
  std::string name;
  Mat value;
  Mat grad;
};

// Ordered set of named tensors. Order defines the flat layout used by the
// optimizer, by averaging and by the wire format, so it must stay stable
// for the lifetime of a training run.
struct ParamSet {
  std::vector<NamedTensor> items;

  NamedTensor& add(const std::string& name, std::size_t rows, std::size_t cols);
  NamedTensor& at(const std::string& name);
  const NamedTensor& at(const std::string& name) const;
  bool has(const std::string& name) const;

  std::size_t total_size() const;
  void zero_grad();

  std::vector<double> flatten() const;
  std::vector<double> flatten_grad() const;
  void unflatten(std::span<const double> flat);

  // (name, rows, cols) triples in order; two sets are compatible iff equal.
  std::vector<std::string> manifest() const;
};

bool same_manifest(const ParamSet& a, const ParamSet& b);

// Little-endian byte format: magic, tensor count, per-tensor manifest
// entries, then all values as IEEE-754 doubles in manifest order.
std::vector<std::uint8_t> serialize_params(const ParamSet& p);

// Rebuilds a ParamSet with the template's structure; throws ManifestMismatch
// if the payload manifest disagrees, TruncatedPayload if bytes run short.
ParamSet deserialize_params(std::span<const std::uint8_t> bytes, const ParamSet& templ);

// Elementwise mean (a + b) / 2; manifests must match.
ParamSet param_average(const ParamSet& a, const ParamSet& b);

struct AdamState {
  std::int64_t t = 0;
  std::vector<double> m;
  std::vector<double> v;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  explicit AdamState(std::size_t n, double learning_rate = 1e-3)
      : m(n, 0.0), v(n, 0.0), lr(learning_rate) {}
};

// Bias-corrected Adam update applied in flat order.
void adam_step(ParamSet& params, std::span<const double> grads, AdamState& state);

}  // namespace sofanet
