#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "fairmine/model.hpp"

namespace fairmine {

struct Checkpoint {
  /// Hash of the canonical experiment configuration that produced this state.
  std::uint64_t config_hash = 0;
  NetworkShape shape;
  Vector parameters;
  OptimizerState optimizer;
  /// Opaque training-loop state (JSON) needed to resume bit-exactly.
  std::string run_state;

  EmbeddingNetwork network() const;
};

Checkpoint make_checkpoint(std::uint64_t config_hash, const EmbeddingNetwork& net,
                           const OptimizerState& optimizer, std::string run_state);

/// Written through a temporary file and renamed into place.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);
/// Rejects a checkpoint whose config hash differs from expected_config_hash.
Checkpoint load_checkpoint(const std::filesystem::path& path, std::uint64_t expected_config_hash);

}  // namespace fairmine
