#include "doctest.h"

#include <cmath>

#include "crec/metrics/metrics.hpp"
#include "crec/recon/decoder.hpp"
#include "crec/recon/initial.hpp"
#include "crec/recon/marching_cubes.hpp"
#include "crec/recon/recon_loss.hpp"
#include "test_util.hpp"

using namespace crec;

namespace {

InitialConfig tiny_initial() {
  InitialConfig cfg;
  cfg.visual.feature_dim = 16;
  cfg.visual.base_channels = 2;
  cfg.articulation_dim = 8;
  return cfg;
}

DecoderConfig tiny_decoder() {
  DecoderConfig cfg;
  cfg.fc_dim = 6;
  cfg.f0_dim = 10;
  cfg.width = 12;
  return cfg;
}

Tensor random_image(Rng& rng) {
  Tensor img({3, kImageSize, kImageSize});
  for (double& v : img.v) v = rng.uniform();
  return img;
}

}  // namespace

TEST_CASE("initial features have the contracted 304 length and react to pose and image") {
  CHECK(InitialConfig{}.f0_dim() == 304);
  Rng rng(1);
  nn::ParamStore ps;
  const InitialModule init(ps, tiny_initial(), rng);
  Rng irng(2);
  const Tensor img = random_image(irng);
  HandPose pose;
  const Tensor a = init.features(ps, img, pose)->val;
  require_shape(a, {1, 24}, "f0");
  const Tensor b = init.features(ps, img, pose)->val;
  CHECK(a.v == b.v);

  HandPose curled = pose;
  curled.joint_axis_angle[finger_joint(2, 1)] = {0.0, 0.0, 0.7};
  const Tensor c = init.features(ps, img, curled)->val;
  CHECK(a.v != c.v);
  const Tensor d = init.features(ps, random_image(irng), pose)->val;
  CHECK(a.v != d.v);
}

TEST_CASE("hand pose for stage two: exact ground truth or seeded perturbation") {
  const GraspScene s = generate_scene(21);
  const HandPose gt = hand_pose_for_recon(s, HandSource::GroundTruth);
  CHECK(gt.articulation().v == s.hand_pose.articulation().v);

  const HandPose n1 = hand_pose_for_recon(s, HandSource::Predicted, 0.05, 9);
  const HandPose n2 = hand_pose_for_recon(s, HandSource::Predicted, 0.05, 9);
  CHECK(n1.articulation().v == n2.articulation().v);
  CHECK(n1.articulation().v != gt.articulation().v);
  const HandPose n3 = hand_pose_for_recon(s, HandSource::Predicted, 0.05, 10);
  CHECK(n1.articulation().v != n3.articulation().v);

  double drift = 0;
  for (int j = 0; j < kHandJoints; ++j)
    drift = std::max(drift, (n1.joint_axis_angle[j] - gt.joint_axis_angle[j]).norm());
  CHECK(drift > 0.0);
  CHECK(drift < 0.5);

  CHECK(hand_source_from_name(hand_source_name(HandSource::Predicted)) == HandSource::Predicted);
  CHECK_THROWS(hand_source_from_name("oracle"));
}

TEST_CASE("feature fusion: 656 -> 304 at paper scale, affine in its inputs") {
  // paper-scale fuse layer width
  {
    Rng rng(3);
    nn::ParamStore ps;
    const SdfDecoder dec(ps, DecoderConfig{}, rng);
    CHECK(dec.cfg.fc_dim + dec.cfg.f0_dim == 656);
    CHECK(dec.cfg.fused_dim() == 304);
    CHECK(dec.fuse.in == 656);
    CHECK(dec.fuse.out == 304);
  }

  Rng rng(4);
  nn::ParamStore ps;
  const SdfDecoder dec(ps, tiny_decoder(), rng);
  const int m = 5;
  Tensor fc1({m, 6}), fc2({m, 6}), f0({m, 10});
  for (double& v : fc1.v) v = rng.uniform(-1, 1);
  for (double& v : fc2.v) v = rng.uniform(-1, 1);
  for (double& v : f0.v) v = rng.uniform(-1, 1);
  const Tensor ya = dec.fuse_features(ps, ad::constant(fc1), ad::constant(f0))->val;
  const Tensor yb = dec.fuse_features(ps, ad::constant(fc2), ad::constant(f0))->val;
  require_shape(ya, {m, 10}, "fused");
  CHECK(ya.v != yb.v);

  // affine: fuse(0.3 a + 0.7 b) == 0.3 fuse(a) + 0.7 fuse(b)
  Tensor mix({m, 6});
  for (size_t i = 0; i < mix.v.size(); ++i) mix.v[i] = 0.3 * fc1.v[i] + 0.7 * fc2.v[i];
  const Tensor ym = dec.fuse_features(ps, ad::constant(mix), ad::constant(f0))->val;
  for (size_t i = 0; i < ym.v.size(); ++i)
    CHECK(ym.v[i] == doctest::Approx(0.3 * ya.v[i] + 0.7 * yb.v[i]).epsilon(1e-9));

  // zero contact feature is a valid input (the no-contact baseline)
  const Tensor y0 = dec.fuse_features(ps, ad::constant(Tensor({m, 6})), ad::constant(f0))->val;
  require_shape(y0, {m, 10}, "fused zero");
}

TEST_CASE("decoder skip layer re-injects the input at layer 4") {
  Rng rng(5);
  nn::ParamStore ps;
  const SdfDecoder dec(ps, tiny_decoder(), rng);
  const DecoderConfig& c = dec.cfg;
  CHECK(DecoderConfig::kLayers == 8);
  CHECK(c.input_dim() == 3 + c.f0_dim);
  CHECK(dec.layers[0].in == c.input_dim());
  for (int l = 1; l < 8; ++l)
    CHECK(dec.layers[l].in == (l == DecoderConfig::kSkipLayer ? c.width + c.input_dim() : c.width));
  for (int l = 0; l < 7; ++l) CHECK(dec.layers[l].out == c.width);
  CHECK(dec.layers[7].out == 1);

  // paper-scale input width: 3 + 304 = 307
  CHECK(DecoderConfig{}.input_dim() == 307);
}

TEST_CASE("decoder output shape, determinism, and unsquashed range") {
  Rng rng(6);
  nn::ParamStore ps;
  const SdfDecoder dec(ps, tiny_decoder(), rng);
  Tensor xs({9, 3}), fc({9, 6}), f0({1, 10});
  for (double& v : xs.v) v = rng.uniform(-1, 1);
  for (double& v : fc.v) v = rng.uniform(-1, 1);
  for (double& v : f0.v) v = rng.uniform(-1, 1);
  const Tensor s1 = dec.decode(ps, xs, ad::constant(fc), ad::constant(f0))->val;
  require_shape(s1, {9, 1}, "decoded sdf");
  const Tensor s2 = dec.decode(ps, xs, ad::constant(fc), ad::constant(f0))->val;
  CHECK(s1.v == s2.v);
  // the contact feature conditions the output
  Tensor fc2 = fc;
  fc2.at(0, 0) += 0.5;
  const Tensor s3 = dec.decode(ps, xs, ad::constant(fc2), ad::constant(f0))->val;
  CHECK(s1.v != s3.v);
}

TEST_CASE("decoder gradients match finite differences on 20 instances") {
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(500 + trial);
    nn::ParamStore ps;
    DecoderConfig cfg = tiny_decoder();
    cfg.width = 8 + 4 * rng.uniform_int(2);
    const SdfDecoder dec(ps, cfg, rng);
    const int m = 3 + rng.uniform_int(4);
    Tensor xs({m, 3}), fc({m, cfg.fc_dim}), f0({1, cfg.f0_dim}), gt({m});
    for (double& v : xs.v) v = rng.uniform(-1, 1);
    for (double& v : fc.v) v = rng.uniform(-1, 1);
    for (double& v : f0.v) v = rng.uniform(-1, 1);
    for (double& v : gt.v) v = rng.uniform(-0.5, 0.5);
    worst = std::max(worst, testutil::fd_check_params(ps, [&] {
      const ad::Var s = dec.decode(ps, xs, ad::constant(fc), ad::constant(f0));
      return recon_loss(s, gt, Tensor({0}), ad::constant(Tensor({0, 1})), false).total;
    }));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("contact_indices is a strict threshold") {
  const Tensor c({4}, {0.5, 0.7, 0.2, 0.9});
  CHECK(contact_indices(c, 0.5) == std::vector<int>{1, 3});
  CHECK(contact_indices(c, 0.1) == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("reconstruction loss: L1 term, the worked contact example, and clamping") {
  // obj: mean |s - s_gt|
  const ad::Var pred = ad::constant(Tensor({3, 1}, {0.1, -0.2, 0.4}));
  const Tensor gt({3}, {0.0, -0.2, 0.1});
  const ReconLossBreakdown plain =
      recon_loss(pred, gt, Tensor({0}), ad::constant(Tensor({0, 1})), false);
  CHECK(plain.obj->val.at(0) == doctest::Approx((0.1 + 0.0 + 0.3) / 3).epsilon(1e-9));
  CHECK(plain.hoi->val.at(0) == 0.0);
  CHECK(plain.total->val.at(0) == doctest::Approx(plain.obj->val.at(0)).epsilon(1e-12));

  // two contact vertices, c = (0.8, 1.0), |s_h| = (0.1, 0.2) -> 0.14
  const Tensor probs({2}, {0.8, 1.0});
  const ad::Var hand_sdf = ad::constant(Tensor({2, 1}, {-0.1, 0.2}));
  const ReconLossBreakdown hoi = recon_loss(pred, gt, probs, hand_sdf, true);
  CHECK(hoi.hoi->val.at(0) == doctest::Approx(0.14).epsilon(1e-9));
  CHECK(hoi.n_contacts == 2);
  CHECK(hoi.total->val.at(0) ==
        doctest::Approx(plain.obj->val.at(0) + 0.14).epsilon(1e-9));

  // no contacts above threshold -> the attraction term is exactly zero
  const ReconLossBreakdown none = recon_loss(pred, gt, Tensor({0}), hand_sdf, true);
  CHECK(none.hoi->val.at(0) == 0.0);

  // truncation clamps both sides before the L1
  const ad::Var far_pred = ad::constant(Tensor({1, 1}, {10.0}));
  const Tensor far_gt({1}, {0.2});
  const ReconLossBreakdown trunc =
      recon_loss(far_pred, far_gt, Tensor({0}), ad::constant(Tensor({0, 1})), false, 0.5);
  CHECK(trunc.obj->val.at(0) == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("the contact attraction term grows with hand penetration") {
  const ad::Var pred = ad::constant(Tensor({1, 1}, {0.0}));
  const Tensor gt({1}, {0.0});
  const Tensor probs({3}, {0.9, 0.8, 0.7});
  double prev = -1;
  for (double mag : {0.01, 0.05, 0.2}) {
    const ad::Var hs = ad::constant(Tensor({3, 1}, {-mag, mag, -mag}));
    const double l = recon_loss(pred, gt, probs, hs, true).total->val.at(0);
    CHECK(l > prev);
    prev = l;
  }
}

TEST_CASE("marching cubes recovers a sphere within one cell at 64^3") {
  const auto sphere = [](const Vec3& p) { return p.norm() - 0.3; };
  const MeshResult res = extract_mesh(sphere, 64);
  CHECK(!res.empty);
  CHECK(!res.mesh.empty());
  CHECK(is_watertight(res.mesh));
  for (const Vec3& v : res.mesh.vertices) CHECK(std::fabs(v.norm() - 0.3) <= 0.054);
  // area close to 4 pi r^2
  CHECK(res.mesh.area() == doctest::Approx(4 * M_PI * 0.09).epsilon(0.05));
}

TEST_CASE("marching cubes flags an all-positive field as empty") {
  const MeshResult res = extract_mesh([](const Vec3&) { return 1.0; }, 16);
  CHECK(res.empty);
  CHECK(res.mesh.empty());
}

TEST_CASE("doubling the grid resolution tightens the extracted surface") {
  const auto sdf = [](const Vec3& p) {
    return std::sqrt(p.x * p.x + 1.4 * p.y * p.y + 0.8 * p.z * p.z) - 0.35;
  };
  double worst32 = 0, worst64 = 0;
  for (const Vec3& v : extract_mesh(sdf, 32).mesh.vertices) worst32 = std::max(worst32, std::fabs(sdf(v)));
  for (const Vec3& v : extract_mesh(sdf, 64).mesh.vertices) worst64 = std::max(worst64, std::fabs(sdf(v)));
  CHECK(worst64 < worst32);
}

TEST_CASE("grid variant agrees with the callback variant") {
  const auto sdf = [](const Vec3& p) { return p.norm() - 0.25; };
  const int n = 24;
  const Vec3 lo{-1, -1, -1}, hi{1, 1, 1};
  std::vector<double> values((n + 1) * (n + 1) * (n + 1));
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j)
      for (int k = 0; k <= n; ++k) {
        const Vec3 p{lo.x + (hi.x - lo.x) * i / n, lo.y + (hi.y - lo.y) * j / n,
                     lo.z + (hi.z - lo.z) * k / n};
        values[(i * (n + 1) + j) * (n + 1) + k] = sdf(p);
      }
  const MeshResult a = extract_mesh(sdf, n, lo, hi);
  const MeshResult b = extract_mesh_grid(values, n, lo, hi);
  CHECK(a.mesh.vertices.size() == b.mesh.vertices.size());
  CHECK(a.mesh.faces == b.mesh.faces);
  CHECK(chamfer_distance(a.mesh, b.mesh, 2000) < 1e-9);
}
