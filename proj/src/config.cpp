#include "sofanet/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "sofanet/errors.hpp"
#include "sofanet/rng.hpp"

namespace sofanet {

namespace {

std::string trim(const std::string& s) {
  const std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigInvalid("config line " + std::to_string(line_no) + " has no '='");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigInvalid("config line " + std::to_string(line_no) + " has an empty key");
    kv[key] = value;
  }
  return kv;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw ConfigInvalid("config key " + key + ": expected a boolean, got '" + v + "'");
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigInvalid("config key " + key + ": expected a number, got '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const std::uint64_t x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigInvalid("config key " + key + ": expected an integer, got '" + v + "'");
  }
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  for (const auto& [key, value] : parse_kv(text)) {
    if (key == "rounds") cfg.train.rounds = parse_u64(value, key);
    else if (key == "batch_size") cfg.train.batch_size = parse_u64(value, key);
    else if (key == "lr") cfg.train.lr = parse_double(value, key);
    else if (key == "seed") cfg.train.seed = parse_u64(value, key);
    else if (key == "alpha") { cfg.train.alpha = parse_double(value, key); cfg.model.alpha = cfg.train.alpha; }
    else if (key == "mmd") {
      if (value == "rbf") { cfg.train.use_mmd = true; cfg.train.mmd_kind = MmdKind::Rbf; }
      else if (value == "linear") { cfg.train.use_mmd = true; cfg.train.mmd_kind = MmdKind::Linear; }
      else if (value == "none") cfg.train.use_mmd = false;
      else throw ConfigInvalid("config key mmd: expected rbf|linear|none");
    }
    else if (key == "lambda") cfg.train.lambda = parse_double(value, key);
    else if (key == "grad_exchange") cfg.train.grad_exchange = parse_bool(value, key);
    else if (key == "avg_every") cfg.train.avg_every = parse_u64(value, key);
    else if (key == "transport") {
      if (value == "in-process") cfg.train.transport = Transport::InProcess;
      else if (value == "stream") cfg.train.transport = Transport::Stream;
      else throw ConfigInvalid("config key transport: expected in-process|stream");
    }
    else if (key == "hidden_dim") cfg.model.hidden_dim = parse_u64(value, key);
    else if (key == "n_channels") cfg.model.n_channels = parse_u64(value, key);
    else if (key == "n_sofa_classes") cfg.model.n_sofa_classes = parse_u64(value, key);
    else if (key == "multi_channel") cfg.model.multi_channel = parse_bool(value, key);
    else if (key == "sofa_heads") cfg.model.sofa_heads = parse_bool(value, key);
    else if (key == "test_frac") cfg.test_frac = parse_double(value, key);
    else if (key == "split_seed") cfg.split_seed = parse_u64(value, key);
    else if (key == "max_missing") cfg.max_missing = parse_double(value, key);
    else if (key == "stream_port") cfg.stream_port = static_cast<std::uint16_t>(parse_u64(value, key));
    else throw ConfigInvalid("unknown config key '" + key + "'");
  }
  cfg.train.validate();
  return cfg;
}

RunConfig load_config_file(const std::string& path) { return parse_config_text(read_text_file(path)); }

std::string canonical_config(const std::string& text) {
  std::string out;
  for (const auto& [key, value] : parse_kv(text)) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  }
  return out;
}

std::string config_hash_hex(const std::string& text) {
  return to_hex64(fnv1a64(canonical_config(text)));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot open " + path + " for writing");
  out << content;
  if (!out) throw IoFailure("write failed for " + path);
}

}  // namespace sofanet
