#pragma once

#include <cstdint>
#include <string>

#include "sofanet/mmd.hpp"

namespace sofanet {

enum class Transport { InProcess, Stream };

struct TrainConfig {
  std::size_t rounds = 200;
  std::size_t batch_size = 32;
  double lr = 1e-3;
  std::uint64_t seed = 1;
  double alpha = 0.5;
  bool use_mmd = true;
  MmdKind mmd_kind = MmdKind::Rbf;
  double lambda = 1.0;
  bool grad_exchange = false;
  std::size_t avg_every = 1;  // parameter averaging period in rounds
  Transport transport = Transport::InProcess;

  void validate() const;
};

}  // namespace sofanet
