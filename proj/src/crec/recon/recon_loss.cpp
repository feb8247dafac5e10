#include "crec/recon/recon_loss.hpp"

namespace crec {

std::vector<int> contact_indices(const Tensor& c_vertex, double tau) {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(c_vertex.v.size()); ++i)
    if (c_vertex.v[i] > tau) out.push_back(i);
  return out;
}

ReconLossBreakdown recon_loss(const ad::Var& pred_s, const Tensor& gt_s,
                              const Tensor& contact_probs, const ad::Var& hand_sdf, bool use_hoi,
                              double clamp_dist) {
  const int m = pred_s->val.rows();
  require_shape(pred_s->val, {m, 1}, "recon_loss pred");
  require_shape(gt_s, {m}, "recon_loss gt");

  ad::Var p = pred_s;
  Tensor g({m, 1}, gt_s.v);
  if (clamp_dist > 0) {
    p = ad::clamp(p, -clamp_dist, clamp_dist);
    for (auto& v : g.v) v = std::clamp(v, -clamp_dist, clamp_dist);
  }
  ReconLossBreakdown out;
  out.obj = ad::mean(ad::abs_(ad::sub(p, ad::constant(g))));

  const int nc = static_cast<int>(contact_probs.v.size());
  out.n_contacts = nc;
  if (use_hoi && nc > 0) {
    require_shape(hand_sdf->val, {nc, 1}, "recon_loss hand sdf");
    const Tensor c({nc, 1}, contact_probs.v);
    out.hoi = ad::mean(ad::mul(ad::constant(c), ad::abs_(hand_sdf)));
  } else {
    out.hoi = ad::constant(Tensor::scalar(0.0));
  }
  out.total = ad::add(out.obj, out.hoi);
  return out;
}

}  // namespace crec
