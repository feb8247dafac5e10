#pragma once

#include "crec/core/nn.hpp"

namespace crec {

// Symmetric degree normalization with self-loops: Â = D^{-1/2}(A+I)D^{-1/2}.
Tensor normalized_adjacency(const Tensor& adjacency);

// Transformer block with a graph-convolution sub-layer between the attention
// and the feed-forward: post-norm residual around each of the three parts.
struct GraphormerConfig {
  int in_dim = 0;
  int hidden = 256;
  int heads = 4;
  int ffn_mult = 2;
};

struct GraphormerBlock {
  GraphormerConfig cfg;
  nn::Linear in_proj;              // token embedding, in_dim -> hidden
  nn::Linear wq, wk, wv, wo;       // attention projections, hidden -> hidden
  nn::Linear gconv;                // graph conv weight, hidden -> hidden
  nn::Linear ffn1, ffn2;           // hidden -> mult*hidden -> hidden
  nn::Norm ln_attn, ln_graph, ln_ffn;

  GraphormerBlock() = default;
  GraphormerBlock(nn::ParamStore& ps, const std::string& prefix, const GraphormerConfig& cfg,
                  Rng& rng);

  // x: [n, in_dim], adj_norm: Â [n,n] -> [n, hidden]
  ad::Var forward(nn::ParamStore& ps, const ad::Var& x, const Tensor& adj_norm) const;
};

}  // namespace crec
