#include "sofanet/params.hpp"

#include <cmath>
#include <cstring>

#include "sofanet/errors.hpp"

namespace sofanet {

namespace {

constexpr std::uint8_t kMagic[4] = {'S', 'N', 'P', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t x) {
  out.push_back(static_cast<std::uint8_t>(x & 0xff));
  out.push_back(static_cast<std::uint8_t>((x >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>((x >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>((x >> 24) & 0xff));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t& off) {
  if (off + 4 > b.size()) throw TruncatedPayload("param payload ends inside a manifest field");
  std::uint32_t x = static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
                    (static_cast<std::uint32_t>(b[off + 2]) << 16) |
                    (static_cast<std::uint32_t>(b[off + 3]) << 24);
  off += 4;
  return x;
}

}  // namespace

NamedTensor& ParamSet::add(const std::string& name, std::size_t rows, std::size_t cols) {
  items.push_back(NamedTensor{name, Mat(rows, cols), Mat(rows, cols)});
  return items.back();
}

NamedTensor& ParamSet::at(const std::string& name) {
  for (auto& t : items)
    if (t.name == name) return t;
  throw LengthMismatch("no tensor named " + name);
}

const NamedTensor& ParamSet::at(const std::string& name) const {
  for (const auto& t : items)
    if (t.name == name) return t;
  throw LengthMismatch("no tensor named " + name);
}

bool ParamSet::has(const std::string& name) const {
  for (const auto& t : items)
    if (t.name == name) return true;
  return false;
}

std::size_t ParamSet::total_size() const {
  std::size_t n = 0;
  for (const auto& t : items) n += t.value.size();
  return n;
}

void ParamSet::zero_grad() {
  for (auto& t : items) t.grad.zero();
}

std::vector<double> ParamSet::flatten() const {
  std::vector<double> out;
  out.reserve(total_size());
  for (const auto& t : items) out.insert(out.end(), t.value.v.begin(), t.value.v.end());
  return out;
}

std::vector<double> ParamSet::flatten_grad() const {
  std::vector<double> out;
  out.reserve(total_size());
  for (const auto& t : items) out.insert(out.end(), t.grad.v.begin(), t.grad.v.end());
  return out;
}

void ParamSet::unflatten(std::span<const double> flat) {
  if (flat.size() != total_size()) throw LengthMismatch("unflatten: length differs from parameter count");
  std::size_t off = 0;
  for (auto& t : items) {
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(off),
              flat.begin() + static_cast<std::ptrdiff_t>(off + t.value.size()), t.value.v.begin());
    off += t.value.size();
  }
}

std::vector<std::string> ParamSet::manifest() const {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const auto& t : items)
    out.push_back(t.name + ":" + std::to_string(t.value.rows) + "x" + std::to_string(t.value.cols));
  return out;
}

bool same_manifest(const ParamSet& a, const ParamSet& b) { return a.manifest() == b.manifest(); }

std::vector<std::uint8_t> serialize_params(const ParamSet& p) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, static_cast<std::uint32_t>(p.items.size()));
  for (const auto& t : p.items) {
    if (t.name.size() > 0xffff) throw LengthMismatch("tensor name too long");
    out.push_back(static_cast<std::uint8_t>(t.name.size() & 0xff));
    out.push_back(static_cast<std::uint8_t>((t.name.size() >> 8) & 0xff));
    out.insert(out.end(), t.name.begin(), t.name.end());
    out.push_back(2);  // ndim
    put_u32(out, static_cast<std::uint32_t>(t.value.rows));
    put_u32(out, static_cast<std::uint32_t>(t.value.cols));
  }
  for (const auto& t : p.items) {
    const std::size_t off = out.size();
    out.resize(off + t.value.size() * sizeof(double));
    std::memcpy(out.data() + off, t.value.v.data(), t.value.size() * sizeof(double));
  }
  return out;
}

ParamSet deserialize_params(std::span<const std::uint8_t> bytes, const ParamSet& templ) {
  std::size_t off = 0;
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw ManifestMismatch("bad parameter payload magic");
  off = 4;
  const std::uint32_t count = get_u32(bytes, off);
  if (count != templ.items.size()) throw ManifestMismatch("tensor count differs from template");

  ParamSet out;
  for (std::uint32_t i = 0; i < count; ++i) {
    if (off + 2 > bytes.size()) throw TruncatedPayload("param payload ends inside a name length");
    const std::size_t name_len = static_cast<std::size_t>(bytes[off]) | (static_cast<std::size_t>(bytes[off + 1]) << 8);
    off += 2;
    if (off + name_len > bytes.size()) throw TruncatedPayload("param payload ends inside a name");
    std::string name(reinterpret_cast<const char*>(bytes.data() + off), name_len);
    off += name_len;
    if (off + 1 > bytes.size()) throw TruncatedPayload("param payload ends before ndim");
    const std::uint8_t ndim = bytes[off++];
    if (ndim != 2) throw ManifestMismatch("unsupported tensor rank");
    const std::uint32_t rows = get_u32(bytes, off);
    const std::uint32_t cols = get_u32(bytes, off);
    const NamedTensor& want = templ.items[i];
    if (name != want.name || rows != want.value.rows || cols != want.value.cols)
      throw ManifestMismatch("manifest entry " + std::to_string(i) + " disagrees with template");
    out.add(name, rows, cols);
  }
  for (auto& t : out.items) {
    const std::size_t need = t.value.size() * sizeof(double);
    if (off + need > bytes.size()) throw TruncatedPayload("param payload ends inside tensor data");
    std::memcpy(t.value.v.data(), bytes.data() + off, need);
    off += need;
  }
  return out;
}

ParamSet param_average(const ParamSet& a, const ParamSet& b) {
  if (!same_manifest(a, b)) throw ManifestMismatch("param_average: manifests differ");
  ParamSet out;
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    NamedTensor& t = out.add(a.items[i].name, a.items[i].value.rows, a.items[i].value.cols);
    const auto& x = a.items[i].value.v;
    const auto& y = b.items[i].value.v;
    for (std::size_t j = 0; j < x.size(); ++j) t.value.v[j] = (x[j] + y[j]) / 2.0;
  }
  return out;
}

void adam_step(ParamSet& params, std::span<const double> grads, AdamState& state) {
  const std::size_t n = params.total_size();
  if (grads.size() != n || state.m.size() != n || state.v.size() != n)
    throw LengthMismatch("adam_step: gradient/state length differs from parameter count");
  state.t += 1;
  const double b1t = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double b2t = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  std::size_t off = 0;
  for (auto& t : params.items) {
    double* theta = t.value.v.data();
    for (std::size_t j = 0; j < t.value.size(); ++j) {
      const double g = grads[off + j];
      double& m = state.m[off + j];
      double& v = state.v[off + j];
      m = state.beta1 * m + (1.0 - state.beta1) * g;
      v = state.beta2 * v + (1.0 - state.beta2) * g * g;
      theta[j] -= state.lr * (m / b1t) / (std::sqrt(v / b2t) + state.eps);
    }
    off += t.value.size();
  }
}

}  // namespace sofanet
