#include "crec/contact/backbone.hpp"

namespace crec {

Backbone::Backbone(nn::ParamStore& ps, const std::string& prefix, const BackboneConfig& c,
                   Rng& rng)
    : cfg(c) {
  const int b = c.base_channels;
  const int chans[7] = {3, b, 2 * b, 4 * b, 8 * b, 8 * b, c.feature_dim};
  const int strides[6] = {c.first_stride, 2, 2, 2, 2, 1};
  for (int i = 0; i < 6; ++i) {
    const int k = i == 0 && c.first_stride > 2 ? 5 : 3;
    convs.emplace_back(ps, prefix + ".conv" + std::to_string(i), chans[i], chans[i + 1], k,
                       strides[i], k / 2, rng);
  }
}

ad::Var Backbone::forward(nn::ParamStore& ps, const Tensor& image) const {
  require_shape(image, {3, kImageSize, kImageSize}, "backbone input");
  ad::Var h = ad::constant(image);
  for (const auto& conv : convs) h = ad::relu(conv(ps, h));
  return ad::reshape(ad::global_avg_pool(h), {1, cfg.feature_dim});
}

}  // namespace crec
