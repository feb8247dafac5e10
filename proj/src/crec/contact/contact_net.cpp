#include "crec/contact/contact_net.hpp"

#include <algorithm>
#include <cmath>

namespace crec {

namespace {
constexpr double kBceEps = 1e-7;

ad::Var repeat_row(const ad::Var& row, int n) {
  return ad::gather_rows(row, std::vector<int>(n, 0));
}

Tensor sub_positions(const HandTemplate& t) {
  Tensor p({HandTemplate::kSubVertices, 3});
  for (int j = 0; j < HandTemplate::kSubVertices; ++j)
    for (int k = 0; k < 3; ++k) p.at(j, k) = t.vertices.at(t.sub_indices[j], k);
  return p;
}

}  // namespace

ad::Var weighted_bce(const ad::Var& p, const std::vector<bool>& y, const Tensor& w) {
  const int n = p->val.rows();
  if (static_cast<int>(y.size()) != n || w.size() != n)
    throw DimensionError("contact_loss: size mismatch");
  Tensor yt({n, 1}), yc({n, 1}), wt({n, 1});
  for (int i = 0; i < n; ++i) {
    yt.at(i, 0) = y[i] ? 1.0 : 0.0;
    yc.at(i, 0) = y[i] ? 0.0 : 1.0;
    wt.at(i, 0) = w.at(i);
  }
  const ad::Var pc = ad::clamp(p, kBceEps, 1.0 - kBceEps);
  const ad::Var one_minus = ad::sub(ad::constant(Tensor::full({n, 1}, 1.0)), pc);
  const ad::Var nll = ad::sub(ad::constant(Tensor({n, 1})),
                              ad::add(ad::mul(ad::constant(yt), ad::log_(pc)),
                                      ad::mul(ad::constant(yc), ad::log_(one_minus))));
  return ad::mean(ad::mul(ad::constant(wt), nll));
}

FrequencyWeights FrequencyWeights::uniform() {
  return {Tensor::full({HandTemplate::kParts}, 1.0),
          Tensor::full({HandTemplate::kSubVertices}, 1.0),
          Tensor::full({HandTemplate::kVertices}, 1.0)};
}

Tensor contact_frequency_weights(const Tensor& frequencies) {
  const auto [lo_it, hi_it] = std::minmax_element(frequencies.v.begin(), frequencies.v.end());
  const double lo = *lo_it, hi = *hi_it;
  if (lo < 0 || hi > 1) throw DimensionError("contact_frequency_weights: frequency outside [0,1]");
  if (hi - lo < 1e-12)
    throw DegenerateFrequencies("contact_frequency_weights: all frequencies equal");
  Tensor w(frequencies.shape);
  for (size_t i = 0; i < w.v.size(); ++i)
    w.v[i] = 0.1 + 0.9 * (frequencies.v[i] - lo) / (hi - lo);
  return w;
}

ad::Var build_part_node_features(const ad::Var& f, const HandTemplate& t) {
  return ad::concat_cols({repeat_row(f, HandTemplate::kParts), ad::constant(t.part_centers)});
}

ad::Var build_vertex_node_features(const ad::Var& f, const ad::Var& c_part,
                                   const HandTemplate& t) {
  require_shape(c_part->val, {HandTemplate::kParts, 1}, "vertex node features c_part");
  const ad::Var c_row = ad::transpose(c_part);  // [1,18]
  return ad::concat_cols({repeat_row(f, HandTemplate::kSubVertices),
                          repeat_row(c_row, HandTemplate::kSubVertices),
                          ad::constant(sub_positions(t))});
}

ContactEstimator::ContactEstimator(nn::ParamStore& ps, const ContactNetConfig& c, Rng& rng)
    : cfg(c) {
  const HandTemplate& t = builtin_template();
  backbone = Backbone(ps, "backbone", c.backbone, rng);
  const int d = c.backbone.feature_dim;
  part_block = GraphormerBlock(ps, "part_block", {d + 3, c.part_hidden, c.heads}, rng);
  part_head = nn::Linear(ps, "part_head", c.part_hidden, 1, rng);
  int in_dim = d + HandTemplate::kParts + 3;
  for (int i = 0; i < 3; ++i) {
    vertex_blocks[i] = GraphormerBlock(
        ps, "vertex_block" + std::to_string(i), {in_dim, c.vertex_hidden[i], c.heads}, rng);
    in_dim = c.vertex_hidden[i];
  }
  vertex_head = nn::Linear(ps, "vertex_head", c.vertex_hidden[2], 1, rng);
  part_adj_norm = normalized_adjacency(t.part_adjacency);
  sub_adj_norm = normalized_adjacency(t.sub_adjacency);
}

ad::Var ContactEstimator::image_feature(nn::ParamStore& ps, const Tensor& image) const {
  return backbone.forward(ps, image);
}

ad::Var ContactEstimator::part_probs(nn::ParamStore& ps, const ad::Var& f) const {
  const ad::Var g = build_part_node_features(f, builtin_template());
  const ad::Var h = part_block.forward(ps, g, part_adj_norm);
  return ad::sigmoid(part_head(ps, h));
}

std::pair<ad::Var, ad::Var> ContactEstimator::vertex_probs(nn::ParamStore& ps, const ad::Var& f,
                                                           const ad::Var& c_part) const {
  const HandTemplate& t = builtin_template();
  ad::Var h = build_vertex_node_features(f, c_part, t);
  for (const auto& block : vertex_blocks) h = block.forward(ps, h, sub_adj_norm);
  const ad::Var c_sub = ad::sigmoid(vertex_head(ps, h));
  const ad::Var c_vertex = ad::matmul(ad::constant(t.upsample_matrix), c_sub);
  return {c_sub, c_vertex};
}

ContactState ContactEstimator::predict(nn::ParamStore& ps, const Tensor& image,
                                       bool cascade) const {
  const ad::Var f = image_feature(ps, image);
  const ad::Var cp = cascade
                         ? part_probs(ps, f)
                         : ad::constant(Tensor({HandTemplate::kParts, 1}));
  const auto [cs, cv] = vertex_probs(ps, f, cp);
  ContactState out;
  out.c_part = Tensor({HandTemplate::kParts}, cascade ? cp->val.v : part_probs(ps, f)->val.v);
  out.c_sub = Tensor({HandTemplate::kSubVertices}, cs->val.v);
  out.c_vertex = Tensor({HandTemplate::kVertices}, cv->val.v);
  return out;
}

std::vector<bool> threshold_contacts(const Tensor& c, double tau) {
  if (tau <= 0 || tau >= 1) throw std::invalid_argument("threshold_contacts: tau outside (0,1)");
  std::vector<bool> out(c.v.size());
  for (size_t i = 0; i < c.v.size(); ++i) out[i] = c.v[i] > tau;
  return out;
}

Tensor propagate_part_to_vertices(const Tensor& c_part, const HandTemplate& t) {
  require_shape(c_part, {HandTemplate::kParts}, "propagate_part_to_vertices");
  Tensor out({HandTemplate::kVertices});
  for (int i = 0; i < HandTemplate::kVertices; ++i) out.at(i) = c_part.at(t.part_labels[i]);
  return out;
}

std::vector<bool> submesh_gt(const std::vector<bool>& gt_vertex, const HandTemplate& t) {
  if (static_cast<int>(gt_vertex.size()) != HandTemplate::kVertices)
    throw DimensionError("submesh_gt: need 778 labels");
  // cluster membership from the downsample matrix support
  std::vector<bool> out(HandTemplate::kSubVertices, false);
  for (int j = 0; j < HandTemplate::kSubVertices; ++j)
    for (int i = 0; i < HandTemplate::kVertices; ++i)
      if (t.downsample_matrix.at(j, i) > 0 && gt_vertex[i]) {
        out[j] = true;
        break;
      }
  return out;
}

ContactLossBreakdown contact_loss(const ad::Var& c_part, const ad::Var& c_sub,
                                  const ad::Var& c_vertex, const std::vector<bool>& gt_part,
                                  const std::vector<bool>& gt_sub,
                                  const std::vector<bool>& gt_vertex, const FrequencyWeights& w,
                                  double lambda_p, double lambda_v, double lambda_vs) {
  ContactLossBreakdown out;
  out.part = weighted_bce(c_part, gt_part, w.w_part);
  out.vertex_sub = weighted_bce(c_sub, gt_sub, w.w_sub);
  out.vertex = weighted_bce(c_vertex, gt_vertex, w.w_vertex);
  out.total = ad::add(ad::scale(out.part, lambda_p),
                      ad::add(ad::scale(out.vertex, lambda_v), ad::scale(out.vertex_sub, lambda_vs)));
  return out;
}

}  // namespace crec
