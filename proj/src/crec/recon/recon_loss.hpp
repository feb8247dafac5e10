#pragma once

#include "crec/core/autodiff.hpp"

namespace crec {

struct ReconLossBreakdown {
  ad::Var total;
  ad::Var obj;   // mean |s - s_gt| over sampled points
  ad::Var hoi;   // (1/Nc) sum c_i |s_h_i| over contact vertices
  int n_contacts = 0;
};

// Indices of contact vertices: c_vertex[i] > tau (strict).
std::vector<int> contact_indices(const Tensor& c_vertex, double tau = 0.5);

// pred_s: [m,1], gt_s: [m]; contact_probs: the c values of the contact set (in
// contact_indices order); hand_sdf: [Nc,1] decoder outputs at those vertices.
// clamp_dist > 0 clamps both pred and gt to [-clamp_dist, clamp_dist] before
// the L1 (optional DeepSDF-style truncation; 0 = plain L1).
ReconLossBreakdown recon_loss(const ad::Var& pred_s, const Tensor& gt_s,
                              const Tensor& contact_probs, const ad::Var& hand_sdf,
                              bool use_hoi = true, double clamp_dist = 0.0);

}  // namespace crec
