#pragma once

#include "crec/core/nn.hpp"

namespace crec {

// Implicit SDF decoder: fuses the queried contact feature with f0, then an
// 8-layer MLP with the decoder input re-concatenated at layer 4 (DeepSDF
// skip). No output squashing.
struct DecoderConfig {
  int fc_dim = 352;   // queried contact feature length
  int f0_dim = 304;   // initial feature length
  int width = 512;
  static constexpr int kLayers = 8;
  static constexpr int kSkipLayer = 4;

  int fused_dim() const { return f0_dim; }
  int input_dim() const { return 3 + fused_dim(); }
};

struct SdfDecoder {
  DecoderConfig cfg;
  nn::Linear fuse;  // (fc_dim + f0_dim) -> f0_dim
  std::array<nn::Linear, DecoderConfig::kLayers> layers;

  SdfDecoder() = default;
  SdfDecoder(nn::ParamStore& ps, const DecoderConfig& cfg, Rng& rng);

  // fc: [m, fc_dim], f0: [m, f0_dim] -> [m, f0_dim]
  ad::Var fuse_features(nn::ParamStore& ps, const ad::Var& fc, const ad::Var& f0) const;

  // xs: [m,3] normalized points, fc: [m, fc_dim], f0: [1, f0_dim] -> s: [m,1]
  ad::Var decode(nn::ParamStore& ps, const Tensor& xs, const ad::Var& fc, const ad::Var& f0) const;
};

}  // namespace crec
