#pragma once

#include "crec/core/nn.hpp"
#include "crec/synth/render.hpp"

namespace crec {

// Strided 6-layer CNN with global average pooling; stands in for the paper's
// large pretrained backbone. feature_dim D is configurable (paper 2048).
struct BackboneConfig {
  int feature_dim = 256;
  int base_channels = 8;
  int first_stride = 4;
};

struct Backbone {
  BackboneConfig cfg;
  std::vector<nn::Conv2dLayer> convs;

  Backbone() = default;
  Backbone(nn::ParamStore& ps, const std::string& prefix, const BackboneConfig& cfg, Rng& rng);

  // image {3,224,224} -> feature [1,D]
  ad::Var forward(nn::ParamStore& ps, const Tensor& image) const;
};

}  // namespace crec
