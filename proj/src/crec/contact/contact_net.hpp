#pragma once

#include <array>

#include "crec/contact/backbone.hpp"
#include "crec/contact/graphormer.hpp"
#include "crec/hand/hand_template.hpp"

namespace crec {

// Cascaded contact estimator: image feature -> part-level probabilities over
// the 18-part graph -> sub-mesh (195) probabilities -> upsampled 778-vertex
// probabilities.
struct ContactNetConfig {
  BackboneConfig backbone;
  int part_hidden = 256;
  std::array<int, 3> vertex_hidden{1024, 256, 64};
  int heads = 4;
};

struct ContactState {
  Tensor c_part;    // [18]
  Tensor c_sub;     // [195]
  Tensor c_vertex;  // [778]
};

// Per-region weights for the BCE terms, affinely normalized to [0.1, 1].
struct FrequencyWeights {
  Tensor w_part;    // [18]
  Tensor w_sub;     // [195]
  Tensor w_vertex;  // [778]

  static FrequencyWeights uniform();
};

struct DegenerateFrequencies : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// frequencies in [0,1] -> affine map with min -> 0.1, max -> 1.
// All-equal input throws DegenerateFrequencies.
Tensor contact_frequency_weights(const Tensor& frequencies);

// row i = concat(f, part_centers[i]); f: [1,D] -> [18, D+3]
ad::Var build_part_node_features(const ad::Var& f, const HandTemplate& t);
// row j = concat(f, c_part, sub_position[j]); c_part: [18,1] -> [195, D+18+3]
ad::Var build_vertex_node_features(const ad::Var& f, const ad::Var& c_part, const HandTemplate& t);

struct ContactEstimator {
  ContactNetConfig cfg;
  Backbone backbone;
  GraphormerBlock part_block;
  nn::Linear part_head;
  std::array<GraphormerBlock, 3> vertex_blocks;
  nn::Linear vertex_head;
  Tensor part_adj_norm;  // [18,18]
  Tensor sub_adj_norm;   // [195,195]

  ContactEstimator() = default;
  ContactEstimator(nn::ParamStore& ps, const ContactNetConfig& cfg, Rng& rng);

  ad::Var image_feature(nn::ParamStore& ps, const Tensor& image) const;  // [1,D]
  // one block over the part graph + sigmoid scalar head -> [18,1]
  ad::Var part_probs(nn::ParamStore& ps, const ad::Var& f) const;
  // three blocks over the sub-mesh graph; returns (c_sub [195,1], c_vertex [778,1]).
  // Pass c_part = zeros for the single-level ablation.
  std::pair<ad::Var, ad::Var> vertex_probs(nn::ParamStore& ps, const ad::Var& f,
                                           const ad::Var& c_part) const;

  ContactState predict(nn::ParamStore& ps, const Tensor& image, bool cascade = true) const;
};

// Strict comparison c > tau.
std::vector<bool> threshold_contacts(const Tensor& c, double tau = 0.5);

// c_vertex[j] = c_part[part_labels[j]]
Tensor propagate_part_to_vertices(const Tensor& c_part, const HandTemplate& t);

// Mean-reduced weighted BCE of p:[n,1] against 0/1 targets, probabilities
// clamped to [1e-7, 1-1e-7].
ad::Var weighted_bce(const ad::Var& p, const std::vector<bool>& y, const Tensor& w);

struct ContactLossBreakdown {
  ad::Var total;
  ad::Var part, vertex, vertex_sub;
};

// Weighted BCE per level, mean-reduced; total = lp*part + lv*vertex + lvs*sub.
ContactLossBreakdown contact_loss(const ad::Var& c_part, const ad::Var& c_sub,
                                  const ad::Var& c_vertex, const std::vector<bool>& gt_part,
                                  const std::vector<bool>& gt_sub,
                                  const std::vector<bool>& gt_vertex, const FrequencyWeights& w,
                                  double lambda_p = 1.0, double lambda_v = 0.5,
                                  double lambda_vs = 0.5);

// Sub-mesh ground truth: OR over each cluster's member vertices.
std::vector<bool> submesh_gt(const std::vector<bool>& gt_vertex, const HandTemplate& t);

}  // namespace crec
