// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Budgeted end-to-end training runs live here rather than in the
// unit suite because they take minutes, not milliseconds.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "crec/contact/contact_net.hpp"
#include "crec/field/contact_field.hpp"
#include "crec/hand/hand_template.hpp"
#include "crec/harness/config.hpp"
#include "crec/harness/evaluate.hpp"
#include "crec/harness/train_contact.hpp"
#include "crec/harness/train_recon.hpp"
#include "crec/metrics/metrics.hpp"
#include "crec/recon/decoder.hpp"
#include "crec/recon/initial.hpp"
#include "crec/recon/marching_cubes.hpp"
#include "crec/recon/recon_loss.hpp"
#include "crec/synth/dataset.hpp"
#include "crec/synth/primitives.hpp"
#include "test_util.hpp"

using namespace crec;
namespace fs = std::filesystem;

namespace {

const std::string kWork = "/tmp/crec_acceptance";

double now_s() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", x);
  return buf;
}

TriMesh sphere_mesh(double r, const Vec3& center, int res = 64) {
  PrimitiveObject obj;
  obj.kind = PrimitiveObject::Kind::Sphere;
  obj.dims = {r, r, r};
  obj.pose.t = center;
  return tessellate(obj, res);
}

// ---------------------------------------------------------------------------
// 1. metric oracles

Check criterion_metrics() {
  Check c;
  const ContactMetrics mixed = contact_prf({true, false, true, false}, {true, true, false, false});
  c.require(std::fabs(mixed.f1 - 0.5) < 1e-12, "contact_prf mixed case");

  c.require(std::fabs(chamfer_points({{0, 0, 0}}, {{0.001, 0, 0}}) - 1.0) < 1e-9,
            "two-point chamfer 1.0 mm");

  {
    const double r = 0.03, d = 0.01;
    const double cd = chamfer_distance(sphere_mesh(r, {0, 0, 0}), sphere_mesh(r, {d, 0, 0}), 20000);
    Rng rng(7);
    double acc = 0;
    for (int i = 0; i < 1000000; ++i) {
      Vec3 p{rng.normal(), rng.normal(), rng.normal()};
      p = p * (r / p.norm());
      acc += std::fabs((p - Vec3{d, 0, 0}).norm() - r);
    }
    const double oracle = acc / 1e6 * 1e3;
    c.require(std::fabs(cd - oracle) / oracle < 0.10,
              "sphere chamfer vs dense oracle (" + fmt(cd) + " vs " + fmt(oracle) + ")");
  }

  {
    const TriMesh a = sphere_mesh(0.03, {0, 0, 0}), b = sphere_mesh(0.034, {0, 0, 0});
    c.require(std::fabs(f_score(a, b, 5.0) - 1.0) < 0.02, "F@5 on 4 mm dilation");
    c.require(std::fabs(f_score(a, b, 10.0) - 1.0) < 0.02, "F@10 on 4 mm dilation");
    c.require(f_score(a, b, 3.0) < 0.02, "F@3 on 4 mm dilation");
  }

  {
    const auto sdf = [](const Vec3& p) { return p.norm() - 0.05; };
    Tensor verts({1, 3});
    verts.at(0, 0) = 0.043;
    c.require(std::fabs(penetration_depth_cm(verts, sdf) - 0.7) < 1e-9, "penetration sdf 0.7 cm");
    c.require(std::fabs(penetration_depth_cm(verts, sphere_mesh(0.05, {0, 0, 0})) - 0.7) < 0.05,
              "penetration mesh oracle");
  }

  {
    const double r = 0.03, d = 0.04;
    const double lens = M_PI * (4 * r + d) * (2 * r - d) * (2 * r - d) / 12.0 * 1e6;
    const double est = intersection_volume_cm3(sphere_mesh(r, {0, 0, 0}), sphere_mesh(r, {d, 0, 0}));
    c.require(std::fabs(est - lens) / lens < 0.02,
              "lens volume 2% at 2 mm voxels (" + fmt(est) + " vs " + fmt(lens) + ")");
    const auto sa = [&](const Vec3& p) { return p.norm() - r; };
    const auto sb = [&](const Vec3& p) { return (p - Vec3{d, 0, 0}).norm() - r; };
    const Vec3 lo{d - r, -r, -r}, hi{r, r, r};
    const double v2 = intersection_volume_cm3(sa, sb, lo, hi, 0.002);
    const double v1 = intersection_volume_cm3(sa, sb, lo, hi, 0.001);
    c.require(std::fabs(v2 - v1) / v1 < 0.05, "1 mm vs 2 mm voxels within 5%");
  }
  return c;
}

// ---------------------------------------------------------------------------
// 2. interpolation exactness

Check criterion_interpolation() {
  Check c;
  // per-axis-linear field on a dense res-4 grid
  const int res = 4, ch = 5;
  SparseGridData dense;
  dense.res = res;
  dense.channels = ch;
  Tensor codes({res * res * res, ch});
  auto center = [&](int i) { return -1.0 + (i + 0.5) * 2.0 / res; };
  int r = 0;
  for (int i = 0; i < res; ++i)
    for (int j = 0; j < res; ++j)
      for (int k = 0; k < res; ++k) {
        dense.coords.push_back({i, j, k});
        dense.cell_index[SparseGridData::key(i, j, k)] = r;
        for (int q = 0; q < ch; ++q)
          codes.at(r, q) = (q + 1) * center(i) - 2 * center(j) + 0.5 * q * center(k) + 0.3;
        ++r;
      }
  dense.codes = ad::constant(codes);
  ContactVolumePyramid lin;
  lin.levels[0] = dense;
  for (int l = 1; l < 4; ++l) {
    lin.levels[l].res = res;
    lin.levels[l].channels = 1;
    lin.levels[l].codes = ad::constant(Tensor({0, 1}));
  }
  Rng rng(3);
  Tensor pts({200, 3});
  for (double& v : pts.v) v = rng.uniform(-0.75, 0.75);
  const Tensor feat = query_contact_feature(lin, pts)->val;
  double worst = 0;
  for (int p = 0; p < 200; ++p)
    for (int q = 0; q < ch; ++q) {
      const double want = (q + 1) * pts.at(p, 0) - 2 * pts.at(p, 1) + 0.5 * q * pts.at(p, 2) + 0.3;
      worst = std::max(worst, std::fabs(feat.at(p, q) - want));
    }
  c.require(worst < 1e-9, "linear field reproduction (worst " + fmt(worst) + ")");

  // voxel-center lookups on the real pipeline
  nn::ParamStore ps;
  Rng prng(5);
  const FieldParams params(ps, FieldConfig{}, prng);
  const HandTemplate& t = builtin_template();
  Tensor cv({778});
  for (double& v : cv.v) v = prng.uniform();
  const ContactVolumePyramid pyr =
      diffuse(ps, params, voxelize_codes(ps, params, anchor_codes(cv, t.vertices)));
  int col0 = 0;
  double worst_center = 0;
  for (int l = 0; l < 4; ++l) {
    const SparseGridData& g = pyr.levels[l];
    const auto& cell = g.coords[g.coords.size() / 3];
    const double h = 2.0 / g.res;
    Tensor p({1, 3}, {-1 + (cell[0] + 0.5) * h, -1 + (cell[1] + 0.5) * h, -1 + (cell[2] + 0.5) * h});
    const Tensor f = query_contact_feature(pyr, p)->val;
    const int row = g.row(cell[0], cell[1], cell[2]);
    for (int q = 0; q < g.channels; ++q)
      worst_center = std::max(worst_center, std::fabs(f.at(0, col0 + q) - g.codes->val.at(row, q)));
    col0 += g.channels;
  }
  c.require(worst_center < 1e-12, "voxel-center lookup exact (worst " + fmt(worst_center) + ")");
  return c;
}

// ---------------------------------------------------------------------------
// 3. gradient suite

Check criterion_gradients() {
  Check c;

  double worst_bce = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(300 + trial);
    const int n = 4 + rng.uniform_int(12);
    std::vector<bool> y(n);
    Tensor w({n}), logits({n, 1});
    for (int i = 0; i < n; ++i) {
      y[i] = rng.uniform() < 0.5;
      w.at(i) = rng.uniform(0.1, 1.0);
    }
    for (double& v : logits.v) v = rng.uniform(-2, 2);
    worst_bce = std::max(worst_bce, testutil::fd_check_input(logits, [&](const ad::Var& lv) {
      return weighted_bce(ad::sigmoid(lv), y, w);
    }));
  }
  c.require(worst_bce < 1e-4, "weighted BCE (worst " + fmt(worst_bce) + ")");

  double worst_recon = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(400 + trial);
    const int m = 4 + rng.uniform_int(8), nc = 1 + rng.uniform_int(4);
    Tensor gt({m}), probs({nc}), hs({nc, 1});
    for (double& v : gt.v) v = rng.uniform(-0.5, 0.5);
    for (double& v : probs.v) v = rng.uniform(0.5, 1.0);
    for (double& v : hs.v) v = rng.uniform(-0.3, 0.3);
    Tensor pred({m, 1});
    for (double& v : pred.v) v = rng.uniform(-0.5, 0.5);
    worst_recon = std::max(worst_recon, testutil::fd_check_input(pred, [&](const ad::Var& pv) {
      return recon_loss(pv, gt, probs, ad::constant(hs), true).total;
    }));
    worst_recon = std::max(worst_recon, testutil::fd_check_input(hs, [&](const ad::Var& hv) {
      return recon_loss(ad::constant(pred), gt, probs, hv, true).total;
    }));
  }
  c.require(worst_recon < 1e-4, "reconstruction loss (worst " + fmt(worst_recon) + ")");

  double worst_graph = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(100 + trial);
    nn::ParamStore ps;
    GraphormerConfig gc;
    gc.in_dim = 4 + rng.uniform_int(5);
    gc.hidden = 4 * (1 + rng.uniform_int(2));
    const GraphormerBlock block(ps, "blk", gc, rng);
    const int n = 3 + rng.uniform_int(4);
    Tensor x({n, gc.in_dim}), adj({n, n});
    for (double& v : x.v) v = rng.uniform(-1, 1);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.uniform() < 0.5) adj.at(i, j) = adj.at(j, i) = 1;
    const Tensor nadj = normalized_adjacency(adj);
    worst_graph = std::max(worst_graph, testutil::fd_check_params(ps, [&] {
      const ad::Var y = block.forward(ps, ad::constant(x), nadj);
      return ad::mean(ad::mul(y, y));
    }));
  }
  c.require(worst_graph < 1e-4, "graphormer block (worst " + fmt(worst_graph) + ")");

  double worst_pyr = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(200 + trial);
    nn::ParamStore ps;
    FieldConfig cfg;
    cfg.f_pe = 3;
    cfg.v0_res = 8;
    cfg.v0_dim = 4;
    cfg.dims = {2, 2, 2, 2};
    cfg.expected_feature_dim = 8;
    const FieldParams params(ps, cfg, rng);
    StructuredContactCodes sc;
    const int n = 3 + rng.uniform_int(6);
    sc.anchors = Tensor({n, 3});
    sc.codes = Tensor({n, cfg.d_pe()});
    for (double& v : sc.anchors.v) v = rng.uniform(-0.4, 0.4);
    for (double& v : sc.codes.v) v = rng.uniform(0, 1);
    Tensor pts({4, 3});
    for (double& v : pts.v) v = rng.uniform(-0.6, 0.6);
    worst_pyr = std::max(worst_pyr, testutil::fd_check_params(ps, [&] {
      const auto pyr = diffuse(ps, params, voxelize_codes(ps, params, sc));
      const ad::Var f = query_contact_feature(pyr, pts);
      return ad::mean(ad::mul(f, f));
    }));
  }
  c.require(worst_pyr < 1e-4, "sparse-conv pyramid (worst " + fmt(worst_pyr) + ")");

  double worst_dec = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(500 + trial);
    nn::ParamStore ps;
    DecoderConfig cfg;
    cfg.fc_dim = 6;
    cfg.f0_dim = 10;
    cfg.width = 8 + 4 * rng.uniform_int(2);
    const SdfDecoder dec(ps, cfg, rng);
    const int m = 3 + rng.uniform_int(4);
    Tensor xs({m, 3}), fc({m, cfg.fc_dim}), f0({1, cfg.f0_dim}), gt({m});
    for (double& v : xs.v) v = rng.uniform(-1, 1);
    for (double& v : fc.v) v = rng.uniform(-1, 1);
    for (double& v : f0.v) v = rng.uniform(-1, 1);
    for (double& v : gt.v) v = rng.uniform(-0.5, 0.5);
    worst_dec = std::max(worst_dec, testutil::fd_check_params(ps, [&] {
      const ad::Var s = dec.decode(ps, xs, ad::constant(fc), ad::constant(f0));
      return recon_loss(s, gt, Tensor({0}), ad::constant(Tensor({0, 1})), false).total;
    }));
  }
  c.require(worst_dec < 1e-4, "SDF decoder (worst " + fmt(worst_dec) + ")");
  return c;
}

// ---------------------------------------------------------------------------
// 4. dimension contract

Check criterion_dimensions() {
  Check c;
  c.require(FieldConfig{}.feature_dim() == 352, "field level dims sum to 352");
  bool threw = false;
  try {
    Rng rng(1);
    nn::ParamStore ps;
    FieldConfig bad;
    bad.dims = {32, 64, 128, 64};
    FieldParams p(ps, bad, rng);
  } catch (const DimensionError&) {
    threw = true;
  }
  c.require(threw, "mismatched level dims rejected at construction");

  Rng rng(2);
  nn::ParamStore ps;
  const FieldParams params(ps, FieldConfig{}, rng);
  const HandTemplate& t = builtin_template();
  Tensor cv({778});
  for (double& v : cv.v) v = rng.uniform();
  const auto pyr = diffuse(ps, params, voxelize_codes(ps, params, anchor_codes(cv, t.vertices)));
  const Tensor f = query_contact_feature(pyr, Tensor({3, 3}))->val;
  c.require(f.cols() == 352, "queried contact feature length 352");

  c.require(InitialConfig{}.f0_dim() == 304, "initial feature length 304");
  nn::ParamStore ps2;
  const SdfDecoder dec(ps2, DecoderConfig{}, rng);
  c.require(dec.cfg.fused_dim() == 304 && dec.fuse.in == 656 && dec.fuse.out == 304,
            "fused feature 656 -> 304");
  return c;
}

// ---------------------------------------------------------------------------
// 5. loss spot-checks

Check criterion_losses() {
  Check c;
  const std::vector<bool> gt_part(18, true), gt_sub(195, false), gt_vertex(778, true);
  const ContactLossBreakdown lb = contact_loss(
      ad::constant(Tensor::full({18, 1}, 0.5)), ad::constant(Tensor::full({195, 1}, 0.5)),
      ad::constant(Tensor::full({778, 1}, 0.5)), gt_part, gt_sub, gt_vertex,
      FrequencyWeights::uniform());
  const double ln2 = std::log(2.0);
  c.require(std::fabs(lb.part->val.at(0) - ln2) < 1e-9, "part term ln 2");
  c.require(std::fabs(lb.vertex->val.at(0) - ln2) < 1e-9, "vertex term ln 2");
  c.require(std::fabs(lb.vertex_sub->val.at(0) - ln2) < 1e-9, "sub-mesh term ln 2");

  const ad::Var pred = ad::constant(Tensor({1, 1}));
  const Tensor gt({1});
  const ReconLossBreakdown two = recon_loss(pred, gt, Tensor({2}, {0.8, 1.0}),
                                            ad::constant(Tensor({2, 1}, {-0.1, 0.2})), true);
  c.require(std::fabs(two.hoi->val.at(0) - 0.14) < 1e-9, "two-vertex L_hoi 0.14");

  // no contact probability exceeds 0.5 -> the contact set is empty -> L_hoi = 0
  Tensor cv({778});
  for (int i = 0; i < 778; ++i) cv.at(i) = 0.5 - 1e-6 * (i % 7);
  const std::vector<int> idx = contact_indices(cv, 0.5);
  const ReconLossBreakdown none =
      recon_loss(pred, gt, Tensor({0}), ad::constant(Tensor({0, 1})), true);
  c.require(idx.empty() && none.hoi->val.at(0) == 0.0, "L_hoi exactly 0 with no contacts > 0.5");
  return c;
}

// ---------------------------------------------------------------------------
// 6. single-scene overfit

Check criterion_overfit() {
  Check c;
  const std::string root = kWork + "/overfit_data", out = kWork + "/overfit_out";
  generate_dataset(root, 1, 0, 1, {}, 1024, 0.95);

  ExperimentConfig cfg = desk_config();
  cfg.data.root = root;
  cfg.out_dir = out;
  cfg.seed = 11;
  cfg.recon.contact_source = ContactSource::GroundTruth;
  cfg.recon.hand_source = HandSource::GroundTruth;
  cfg.recon.epochs = 800;
  cfg.recon.batch = 1;
  cfg.recon.samples_per_scene = 1024;
  cfg.recon.eval_scenes = 0;
  std::ostringstream log;
  const TrainReconResult res = train_recon(cfg, "", log);

  ReconModel model = load_recon_model(res.last_checkpoint);
  const StoredScene scene = read_scene(root + "/scenes/000000");
  const SceneConditioning cond = condition_scene(cfg, scene, nullptr);
  const MeshResult mesh = reconstruct_object(model, scene, cond, 64);
  c.require(!mesh.empty, "64^3 extraction nonempty");
  if (!mesh.empty) {
    const double cd = chamfer_distance(mesh.mesh, scene.scene.object_mesh(32));
    c.require(cd < 5.0, "overfit chamfer < 5 mm");
    c.note("chamfer " + fmt(cd) + " mm");
  }
  return c;
}

// ---------------------------------------------------------------------------
// 7. contact learning signal (2000 train / 500 test)

Check criterion_contact_signal() {
  Check c;
  const std::string root = kWork + "/contact_data", out = kWork + "/contact_out";
  generate_dataset(root, 2000, 500, 1, {}, 64, 0.95);

  ExperimentConfig cfg = desk_config();
  cfg.data.root = root;
  cfg.out_dir = out;
  cfg.seed = 11;
  cfg.contact.part_only = true;
  cfg.contact.epochs = 30;
  cfg.contact.batch = 8;
  std::ostringstream log;
  const TrainContactResult res = train_contact(cfg, log);

  const double constant = best_constant_part_f1(load_contact_split(root, "test"));
  c.require(res.best_f1 >= 0.70, "held-out part F1 >= 0.70");
  c.require(res.best_f1 >= constant + 0.15, "beats best constant predictor by 0.15");
  c.note("part F1 " + fmt(res.best_f1) + ", constant baseline " + fmt(constant));
  return c;
}

// ---------------------------------------------------------------------------
// 8. ablation orderings: multi-level vs single-level, L_hoi vs none

Check criterion_ablation_orderings() {
  Check c;
  const std::string root = kWork + "/cascade_data";
  generate_dataset(root, 400, 100, 3, {}, 64, 0.95);
  const std::vector<ContactSceneRef> test = load_contact_split(root, "test");

  // "only part-level" trains the part branch alone; the multi-level arm is the
  // full cascade with its part output read off, both under the same budget
  auto contact_arm = [&](const std::string& name, bool part_only) {
    ExperimentConfig cfg = desk_config();
    cfg.data.root = root;
    cfg.out_dir = kWork + "/" + name;
    cfg.seed = 11;
    cfg.contact.part_only = part_only;
    cfg.contact.epochs = 40;
    cfg.contact.batch = 8;
    std::ostringstream log;
    const TrainContactResult res = train_contact(cfg, log);
    const ContactModel model = load_contact_model(res.last_checkpoint);
    return evaluate_contact(model, test).part.f1;
  };
  const double f1_multi = contact_arm("cascade_multi", false);
  const double f1_single = contact_arm("cascade_single", true);
  c.require(f1_multi >= f1_single - 0.02, "multi-level part F1 >= only-part-level - 0.02");
  c.note("multi " + fmt(f1_multi) + ", only-part " + fmt(f1_single));

  const std::string rroot = kWork + "/recon_data";
  generate_dataset(rroot, 64, 16, 5, {}, 256, 0.95);
  auto recon_arm = [&](const std::string& name, bool use_hoi) {
    ExperimentConfig cfg = desk_config();
    cfg.data.root = rroot;
    cfg.out_dir = kWork + "/" + name;
    cfg.seed = 11;
    cfg.recon.contact_source = ContactSource::GroundTruth;
    cfg.recon.hand_source = HandSource::GroundTruth;
    cfg.recon.use_hoi = use_hoi;
    cfg.recon.epochs = 60;
    cfg.recon.eval_scenes = 0;
    std::ostringstream log;
    const TrainReconResult res = train_recon(cfg, "", log);
    ReconModel model = load_recon_model(res.last_checkpoint);
    return evaluate_split(model, nullptr, "test", log).mean_recon.penetration_depth_cm;
  };
  const double pen_hoi = recon_arm("hoi_on", true);
  const double pen_nohoi = recon_arm("hoi_off", false);
  c.require(pen_hoi <= pen_nohoi + 1e-12, "with-L_hoi penetration <= without");
  c.note("pen with " + fmt(pen_hoi) + " cm, without " + fmt(pen_nohoi) + " cm");
  return c;
}

// ---------------------------------------------------------------------------
// 9. contact conditioning helps

Check criterion_conditioning() {
  Check c;
  const std::string rroot = kWork + "/recon_data";  // shared with criterion 8
  if (!fs::exists(rroot + "/manifest.json")) generate_dataset(rroot, 64, 16, 5, {}, 256, 0.95);

  auto arm = [&](const std::string& name, ContactSource src) {
    ExperimentConfig cfg = desk_config();
    cfg.data.root = rroot;
    cfg.out_dir = kWork + "/" + name;
    cfg.seed = 11;
    cfg.recon.contact_source = src;
    cfg.recon.hand_source = HandSource::GroundTruth;
    cfg.recon.use_hoi = false;  // isolate the conditioning signal
    cfg.recon.epochs = 150;
    cfg.recon.eval_scenes = 0;
    std::ostringstream log;
    const TrainReconResult res = train_recon(cfg, "", log);
    ReconModel model = load_recon_model(res.last_checkpoint);
    return evaluate_split(model, nullptr, "test", log).mean_recon.chamfer_mm;
  };
  const double conditioned = arm("cond_on", ContactSource::GroundTruth);
  const double baseline = arm("cond_off", ContactSource::None);
  c.require(conditioned <= baseline, "conditioned chamfer <= f0-only baseline");
  c.note("conditioned " + fmt(conditioned) + " mm, baseline " + fmt(baseline) + " mm");
  return c;
}

// ---------------------------------------------------------------------------
// 10. diffusion reach

Check criterion_diffusion_reach() {
  Check c;
  Rng rng(9);
  nn::ParamStore ps;
  const FieldParams params(ps, FieldConfig{}, rng);

  // one anchor near the origin
  StructuredContactCodes sc;
  sc.anchors = Tensor({1, 3}, {0.05, -0.03, 0.02});
  sc.codes = Tensor({1, params.cfg.d_pe()});
  for (double& v : sc.codes.v) v = 0.7;
  const SparseGridData v0 = voxelize_codes(ps, params, sc);
  const ContactVolumePyramid pyr = diffuse(ps, params, v0);

  // nonzero within the level-1 receptive field: the anchor's own cell and its
  // dilated neighborhood at the first level
  const SparseGridData& l0 = pyr.levels[0];
  double mag_at_anchor = 0;
  {
    const Tensor f = query_contact_feature(pyr, sc.anchors)->val;
    for (int q = 0; q < l0.channels; ++q) mag_at_anchor += std::fabs(f.at(0, q));
  }
  c.require(mag_at_anchor > 0, "fc nonzero at the anchor");
  double mag_neighbor = 0;
  {
    const auto& cell = l0.coords[0];
    const double h = 2.0 / l0.res;
    const Tensor p({1, 3}, {-1 + (cell[0] + 0.5) * h, -1 + (cell[1] + 0.5) * h,
                            -1 + (cell[2] + 0.5) * h});
    const Tensor f = query_contact_feature(pyr, p)->val;
    for (int q = 0; q < l0.channels; ++q) mag_neighbor += std::fabs(f.at(0, q));
  }
  c.require(mag_neighbor > 0, "fc nonzero inside the level-1 occupancy");

  // exactly zero outside the dilated occupancy at every level: probe points
  // whose whole trilinear stencil misses the occupancy of that level
  Rng prng(10);
  int probed = 0;
  double worst = 0;
  while (probed < 50) {
    Tensor p({1, 3});
    for (double& v : p.v) v = prng.uniform(-0.95, 0.95);
    int col0 = 0;
    bool any_level = false;
    const Tensor f = query_contact_feature(pyr, p)->val;
    for (const SparseGridData& g : pyr.levels) {
      const double h = 2.0 / g.res;
      bool stencil_empty = true;
      for (int corner = 0; corner < 8 && stencil_empty; ++corner) {
        std::array<int, 3> cidx{};
        for (int a = 0; a < 3; ++a) {
          const double u = (p.at(0, a) + 1.0) / h - 0.5;
          cidx[a] = static_cast<int>(std::floor(u)) + ((corner >> a) & 1);
        }
        if (g.row(cidx[0], cidx[1], cidx[2]) >= 0) stencil_empty = false;
      }
      if (stencil_empty) {
        any_level = true;
        for (int q = 0; q < g.channels; ++q) worst = std::max(worst, std::fabs(f.at(0, col0 + q)));
      }
      col0 += g.channels;
    }
    probed += any_level;
  }
  c.require(worst == 0.0, "exact zeros outside the dilated occupancy");

  // occupancy at every level is exactly the dilate+pool closure of the anchor
  std::set<std::array<int, 3>> occ(v0.coords.begin(), v0.coords.end());
  int res = v0.res;
  for (const SparseGridData& g : pyr.levels) {
    std::set<std::array<int, 3>> grown;
    for (const auto& cell : occ)
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj)
          for (int dk = -1; dk <= 1; ++dk) {
            const int i = cell[0] + di, j = cell[1] + dj, k = cell[2] + dk;
            if (i < 0 || j < 0 || k < 0 || i >= res || j >= res || k >= res) continue;
            grown.insert({i / 2, j / 2, k / 2});
          }
    const std::set<std::array<int, 3>> have(g.coords.begin(), g.coords.end());
    c.require(have == grown, "occupancy equals the dilation/pool closure");
    occ = grown;
    res /= 2;
  }
  return c;
}

}  // namespace

int main() {
  fs::remove_all(kWork);
  fs::create_directories(kWork);

  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Check()> fn;
  };
  const std::vector<Criterion> criteria{
      {1, "metric oracles", 120, criterion_metrics},
      {2, "interpolation exactness", 10, criterion_interpolation},
      {3, "gradient suite", 300, criterion_gradients},
      {4, "dimension contract", 60, criterion_dimensions},
      {5, "loss spot-checks", 60, criterion_losses},
      {6, "single-scene overfit", 600, criterion_overfit},
      {7, "contact learning signal", 3600, criterion_contact_signal},
      {8, "ablation orderings", 7200, criterion_ablation_orderings},
      {9, "contact conditioning helps", 3600, criterion_conditioning},
      {10, "diffusion reach", 60, criterion_diffusion_reach},
  };

  int failures = 0;
  for (const Criterion& cr : criteria) {
    const double t0 = now_s();
    Check result;
    try {
      result = cr.fn();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = std::string("exception: ") + e.what();
    }
    const double dt = now_s() - t0;
    if (dt > cr.budget_s) {
      result.ok = false;
      result.detail += (result.detail.empty() ? "" : "; ") + std::string("over time budget");
    }
    failures += !result.ok;
    std::printf("criterion %2d %-28s %s (%.1f s)%s%s\n", cr.id, cr.name,
                result.ok ? "PASS" : "FAIL", dt, result.detail.empty() ? "" : " -- ",
                result.detail.c_str());
    std::fflush(stdout);
  }

  // the generated corpora are large; do not leave them behind
  fs::remove_all(kWork);
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
