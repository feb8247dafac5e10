#include "crec/contact/graphormer.hpp"

#include <cmath>

namespace crec {

Tensor normalized_adjacency(const Tensor& adjacency) {
  const int n = adjacency.rows();
  require_shape(adjacency, {n, n}, "normalized_adjacency");
  Tensor a_hat({n, n});
  std::vector<double> deg(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && adjacency.at(i, j) != adjacency.at(j, i))
        throw DimensionError("normalized_adjacency: adjacency not symmetric");
      deg[i] += adjacency.at(i, j) + (i == j ? 1.0 : 0.0);
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double aij = adjacency.at(i, j) + (i == j ? 1.0 : 0.0);
      if (aij != 0.0) a_hat.at(i, j) = aij / std::sqrt(deg[i] * deg[j]);
    }
  return a_hat;
}

GraphormerBlock::GraphormerBlock(nn::ParamStore& ps, const std::string& prefix,
                                 const GraphormerConfig& c, Rng& rng)
    : cfg(c) {
  if (c.hidden % c.heads != 0)
    throw DimensionError("graphormer: hidden not divisible by head count");
  in_proj = nn::Linear(ps, prefix + ".in", c.in_dim, c.hidden, rng);
  wq = nn::Linear(ps, prefix + ".wq", c.hidden, c.hidden, rng);
  wk = nn::Linear(ps, prefix + ".wk", c.hidden, c.hidden, rng);
  wv = nn::Linear(ps, prefix + ".wv", c.hidden, c.hidden, rng);
  wo = nn::Linear(ps, prefix + ".wo", c.hidden, c.hidden, rng);
  gconv = nn::Linear(ps, prefix + ".gconv", c.hidden, c.hidden, rng);
  ffn1 = nn::Linear(ps, prefix + ".ffn1", c.hidden, c.ffn_mult * c.hidden, rng);
  ffn2 = nn::Linear(ps, prefix + ".ffn2", c.ffn_mult * c.hidden, c.hidden, rng);
  ln_attn = nn::Norm(ps, prefix + ".ln_attn", c.hidden);
  ln_graph = nn::Norm(ps, prefix + ".ln_graph", c.hidden);
  ln_ffn = nn::Norm(ps, prefix + ".ln_ffn", c.hidden);
}

ad::Var GraphormerBlock::forward(nn::ParamStore& ps, const ad::Var& x,
                                 const Tensor& adj_norm) const {
  const int n = x->val.rows();
  require_shape(adj_norm, {n, n}, "graphormer adjacency");
  require_shape(x->val, {n, cfg.in_dim}, "graphormer input");

  const ad::Var h0 = in_proj(ps, x);

  // multi-head self-attention
  const int dh = cfg.hidden / cfg.heads;
  const ad::Var q = wq(ps, h0), k = wk(ps, h0), v = wv(ps, h0);
  std::vector<ad::Var> heads;
  for (int h = 0; h < cfg.heads; ++h) {
    const ad::Var qh = ad::slice_cols(q, h * dh, (h + 1) * dh);
    const ad::Var kh = ad::slice_cols(k, h * dh, (h + 1) * dh);
    const ad::Var vh = ad::slice_cols(v, h * dh, (h + 1) * dh);
    const ad::Var att = ad::softmax_rows(
        ad::scale(ad::matmul(qh, ad::transpose(kh)), 1.0 / std::sqrt(static_cast<double>(dh))));
    heads.push_back(ad::matmul(att, vh));
  }
  const ad::Var attn_out = wo(ps, ad::concat_cols(heads));
  const ad::Var h1 = ln_attn(ps, ad::add(h0, attn_out));

  // graph convolution: Â h W
  const ad::Var gc = gconv(ps, ad::matmul(ad::constant(adj_norm), h1));
  const ad::Var h2 = ln_graph(ps, ad::add(h1, gc));

  // feed-forward
  const ad::Var ff = ffn2(ps, ad::relu(ffn1(ps, h2)));
  return ln_ffn(ps, ad::add(h2, ff));
}

}  // namespace crec
