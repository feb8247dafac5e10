#pragma once

#include <string>

#include "crec/core/nn.hpp"

namespace crec {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CheckpointMeta {
  std::string config_json = "{}";  // full experiment configuration snapshot
  int epoch = 0;
  std::uint64_t rng_seed = 0;
  std::string best_metric_name;
  double best_metric = 0.0;
};

// Versioned container: magic, JSON header (names/shapes/offsets + meta),
// then a raw little-endian fp64 payload. Round-trips bitwise.
void save_checkpoint(const std::string& path, const nn::ParamStore& params,
                     const CheckpointMeta& meta);

// Loads values into an already-constructed store; parameter names and shapes
// must match exactly. Returns the stored meta.
CheckpointMeta load_checkpoint(const std::string& path, nn::ParamStore& params);

// Reads only the meta header (for config inspection without a model).
CheckpointMeta peek_checkpoint(const std::string& path);

}  // namespace crec
