#pragma once

#include <cstdint>
#include <string>

#include "sofanet/model.hpp"
#include "sofanet/train_config.hpp"

namespace sofanet {

// Plain key = value text ('#' comments). Covers every TrainConfig and
// ModelConfig field plus the data-handling knobs.
struct RunConfig {
  TrainConfig train;
  ModelConfig model;
  double test_frac = 0.1;
  std::uint64_t split_seed = 4242;
  double max_missing = 0.8;
  std::uint16_t stream_port = 45111;
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& path);

// Sorted k=v rendering; hashing this makes the digest insensitive to
// comments, ordering and whitespace.
std::string canonical_config(const std::string& text);
std::string config_hash_hex(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace sofanet
