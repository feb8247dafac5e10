#include "crec/recon/decoder.hpp"

namespace crec {

SdfDecoder::SdfDecoder(nn::ParamStore& ps, const DecoderConfig& c, Rng& rng) : cfg(c) {
  fuse = nn::Linear(ps, "decoder.fuse", c.fc_dim + c.f0_dim, c.fused_dim(), rng);
  const int in = c.input_dim();
  for (int l = 0; l < DecoderConfig::kLayers; ++l) {
    const int d_in = l == 0 ? in : (l == DecoderConfig::kSkipLayer ? c.width + in : c.width);
    const int d_out = l == DecoderConfig::kLayers - 1 ? 1 : c.width;
    layers[l] = nn::Linear(ps, "decoder.fc" + std::to_string(l), d_in, d_out, rng);
  }
}

ad::Var SdfDecoder::fuse_features(nn::ParamStore& ps, const ad::Var& fc, const ad::Var& f0) const {
  if (fc->val.cols() != cfg.fc_dim || f0->val.cols() != cfg.f0_dim)
    throw DimensionError("fuse_features: got fc " + fc->val.shape_str() + ", f0 " +
                         f0->val.shape_str());
  return fuse(ps, ad::concat_cols({fc, f0}));
}

ad::Var SdfDecoder::decode(nn::ParamStore& ps, const Tensor& xs, const ad::Var& fc,
                           const ad::Var& f0) const {
  const int m = xs.rows();
  require_shape(xs, {m, 3}, "decode points");
  const ad::Var f0_rows =
      f0->val.rows() == m ? f0 : ad::gather_rows(f0, std::vector<int>(m, 0));
  const ad::Var fused = fuse_features(ps, fc, f0_rows);
  const ad::Var in = ad::concat_cols({ad::constant(xs), fused});
  ad::Var h = in;
  for (int l = 0; l < DecoderConfig::kLayers; ++l) {
    if (l == DecoderConfig::kSkipLayer) h = ad::concat_cols({h, in});
    h = layers[l](ps, h);
    if (l != DecoderConfig::kLayers - 1) h = ad::relu(h);
  }
  return h;
}

}  // namespace crec
