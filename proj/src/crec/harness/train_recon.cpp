#include "crec/harness/train_recon.hpp"

#include <cmath>
#include <filesystem>
#include <numeric>
#include <ostream>

#include "crec/recon/recon_loss.hpp"

namespace crec {

namespace fs = std::filesystem;

ReconModel::ReconModel(const ExperimentConfig& cfg_in) : cfg(cfg_in) {
  Rng rng(cfg.seed * 0x9e3779b97f4a7c15ULL + 3);
  initial = InitialModule(ps, cfg.recon.initial_config(), rng);
  field = FieldParams(ps, cfg.field.field_config(), rng);
  decoder = SdfDecoder(ps, cfg.decoder_config(), rng);
}

ReconModel load_recon_model(const std::string& checkpoint_path) {
  const CheckpointMeta meta = peek_checkpoint(checkpoint_path);
  ReconModel model(config_from_json(meta.config_json));
  load_checkpoint(checkpoint_path, model.ps);
  return model;
}

SceneConditioning condition_scene(const ExperimentConfig& cfg, const StoredScene& scene,
                                  const ContactModel* contact) {
  SceneConditioning out;
  out.pose = hand_pose_for_recon(scene.scene, cfg.recon.hand_source, cfg.recon.hand_noise_rad,
                                 cfg.seed);
  const Tensor world = pose_hand(builtin_template(), builtin_rig(), out.pose);
  out.hand_norm = Tensor({HandTemplate::kVertices, 3});
  for (int i = 0; i < HandTemplate::kVertices; ++i) {
    const Vec3 p = scene.scene.wrist_frame.normalize(
        {world.at(i, 0), world.at(i, 1), world.at(i, 2)});
    out.hand_norm.at(i, 0) = p.x;
    out.hand_norm.at(i, 1) = p.y;
    out.hand_norm.at(i, 2) = p.z;
  }

  out.c_vertex = Tensor({HandTemplate::kVertices});
  switch (cfg.recon.contact_source) {
    case ContactSource::GroundTruth:
      for (int i = 0; i < HandTemplate::kVertices; ++i)
        out.c_vertex.at(i) = scene.scene.gt_vertex_contact[i] ? 1.0 : 0.0;
      break;
    case ContactSource::None:
      break;  // stays zero; the pyramid is skipped entirely
    case ContactSource::Vertex:
    case ContactSource::PartPropagated: {
      if (!contact)
        throw TrainingError("condition_scene: contact source needs a contact checkpoint");
      nn::ParamStore& cps = const_cast<nn::ParamStore&>(contact->ps);
      const ContactState st =
          contact->net.predict(cps, scene.image, contact->cfg.contact.multi_level);
      out.c_vertex = cfg.recon.contact_source == ContactSource::Vertex
                         ? st.c_vertex
                         : propagate_part_to_vertices(st.c_part, builtin_template());
      break;
    }
  }
  return out;
}

std::optional<ContactVolumePyramid> build_scene_pyramid(ReconModel& model,
                                                        const SceneConditioning& cond) {
  if (model.cfg.recon.contact_source == ContactSource::None) return std::nullopt;
  const StructuredContactCodes codes =
      anchor_codes(cond.c_vertex, cond.hand_norm, model.cfg.field.f_pe);
  const SparseGridData v0 = voxelize_codes(model.ps, model.field, codes);
  return diffuse(model.ps, model.field, v0);
}

ad::Var decode_at_points(ReconModel& model, const std::optional<ContactVolumePyramid>& pyramid,
                         const ad::Var& f0, const Tensor& points) {
  const int m = points.rows();
  const ad::Var fc = pyramid
                         ? query_contact_feature(*pyramid, points)
                         : ad::constant(Tensor({m, model.cfg.field.field_config().feature_dim()}));
  return model.decoder.decode(model.ps, points, fc, f0);
}

MeshResult reconstruct_object(ReconModel& model, const StoredScene& scene,
                              const SceneConditioning& cond, int grid_res) {
  const ad::Var f0 = model.initial.features(model.ps, scene.image, cond.pose);
  const std::optional<ContactVolumePyramid> pyramid = build_scene_pyramid(model, cond);

  const int np = grid_res + 1;
  std::vector<double> values(static_cast<size_t>(np) * np * np);
  const int chunk = 4096;
  std::vector<std::array<int, 3>> idx;
  idx.reserve(chunk);
  Tensor pts({chunk, 3});
  auto flush = [&]() {
    if (idx.empty()) return;
    Tensor sub({static_cast<int>(idx.size()), 3});
    std::copy(pts.v.begin(), pts.v.begin() + idx.size() * 3, sub.v.begin());
    const Tensor s = decode_at_points(model, pyramid, f0, sub)->val;
    for (size_t r = 0; r < idx.size(); ++r)
      values[(static_cast<size_t>(idx[r][0]) * np + idx[r][1]) * np + idx[r][2]] = s.at(
          static_cast<int>(r), 0);
    idx.clear();
  };
  for (int i = 0; i < np; ++i)
    for (int j = 0; j < np; ++j)
      for (int k = 0; k < np; ++k) {
        const int r = static_cast<int>(idx.size());
        pts.at(r, 0) = -1.0 + 2.0 * i / grid_res;
        pts.at(r, 1) = -1.0 + 2.0 * j / grid_res;
        pts.at(r, 2) = -1.0 + 2.0 * k / grid_res;
        idx.push_back({i, j, k});
        if (static_cast<int>(idx.size()) == chunk) flush();
      }
  flush();

  MeshResult res = extract_mesh_grid(values, grid_res, {-1, -1, -1}, {1, 1, 1});
  for (Vec3& v : res.mesh.vertices) v = scene.scene.wrist_frame.denormalize(v);
  return res;
}

namespace {

// Everything frozen per scene: conditioning plus the contact set for L_hoi.
struct PreparedScene {
  StoredScene stored;
  SceneConditioning cond;
  std::vector<int> contact_idx;
  Tensor contact_probs;   // [nc]
  Tensor contact_points;  // [nc,3] normalized hand vertices
};

PreparedScene prepare_scene(const ExperimentConfig& cfg, StoredScene stored,
                            const ContactModel* contact) {
  PreparedScene p{std::move(stored), {}, {}, {}, {}};
  p.cond = condition_scene(cfg, p.stored, contact);
  p.contact_idx = contact_indices(p.cond.c_vertex, 0.5);
  const int nc = static_cast<int>(p.contact_idx.size());
  p.contact_probs = Tensor({nc});
  p.contact_points = Tensor({nc, 3});
  for (int r = 0; r < nc; ++r) {
    p.contact_probs.at(r) = p.cond.c_vertex.at(p.contact_idx[r]);
    for (int k = 0; k < 3; ++k) p.contact_points.at(r, k) = p.cond.hand_norm.at(p.contact_idx[r], k);
  }
  return p;
}

}  // namespace

TrainReconResult train_recon(const ExperimentConfig& cfg, const std::string& contact_checkpoint,
                             std::ostream& log) {
  const bool needs_contact_net = cfg.recon.contact_source == ContactSource::Vertex ||
                                 cfg.recon.contact_source == ContactSource::PartPropagated;
  std::optional<ContactModel> contact;
  if (needs_contact_net) {
    if (contact_checkpoint.empty())
      throw TrainingError("train_recon: contact_source=" +
                          std::string(contact_source_name(cfg.recon.contact_source)) +
                          " requires a contact checkpoint");
    contact.emplace(load_contact_model(contact_checkpoint));
  }

  const Manifest manifest = load_manifest(cfg.data.root);
  std::vector<PreparedScene> train, test;
  for (const ManifestEntry& e : manifest.split("train"))
    train.push_back(prepare_scene(cfg, read_scene((fs::path(cfg.data.root) / e.dir).string()),
                                  contact ? &*contact : nullptr));
  for (const ManifestEntry& e : manifest.split("test")) {
    if (static_cast<int>(test.size()) >= cfg.recon.eval_scenes) break;
    test.push_back(prepare_scene(cfg, read_scene((fs::path(cfg.data.root) / e.dir).string()),
                                 contact ? &*contact : nullptr));
  }
  if (train.empty()) throw TrainingError("train_recon: empty training split");

  ReconModel model(cfg);
  fs::create_directories(cfg.out_dir);
  TrainReconResult result;
  result.best_checkpoint = (fs::path(cfg.out_dir) / "recon_best.ckpt").string();
  result.last_checkpoint = (fs::path(cfg.out_dir) / "recon_last.ckpt").string();

  CheckpointMeta meta;
  meta.config_json = config_to_json(cfg);
  meta.rng_seed = cfg.seed;
  meta.best_metric_name = "chamfer_mm";

  log << "train_recon: " << train.size() << " train scenes, " << test.size()
      << " eval scenes, params=" << model.ps.total_size() << ", contact_source="
      << contact_source_name(cfg.recon.contact_source) << ", hash=" << config_hash(cfg) << "\n";

  auto eval_chamfer = [&]() {
    if (test.empty()) return std::nan("");
    double sum = 0;
    int ok = 0;
    for (PreparedScene& p : test) {
      const MeshResult mr = reconstruct_object(model, p.stored, p.cond, cfg.recon.grid_res);
      if (mr.empty || mr.mesh.empty()) continue;
      sum += chamfer_distance(mr.mesh, p.stored.scene.object_mesh(24), cfg.recon.eval_samples);
      ++ok;
    }
    return ok > 0 ? sum / ok : std::nan("");
  };

  if (cfg.recon.epochs <= 0) {
    save_checkpoint(result.last_checkpoint, model.ps, meta);
    save_checkpoint(result.best_checkpoint, model.ps, meta);
    log << "train_recon: 0 epochs requested, wrote initial checkpoint\n";
    return result;
  }

  Rng order_rng(cfg.seed * 0x9e3779b97f4a7c15ULL + 4);
  Rng sample_rng(cfg.seed * 0x9e3779b97f4a7c15ULL + 5);
  std::vector<int> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  const int batch = std::max(1, cfg.recon.batch);

  for (int epoch = 0; epoch < cfg.recon.epochs; ++epoch) {
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
      std::swap(order[i], order[order_rng.uniform_int(i + 1)]);

    double ep_loss = 0, ep_obj = 0, ep_hoi = 0;
    int in_batch = 0;
    model.ps.zero_grad();
    for (size_t step = 0; step < order.size(); ++step) {
      PreparedScene& p = train[order[step]];
      const int n_stored = static_cast<int>(p.stored.sdf.size());
      const int m = std::min(cfg.recon.samples_per_scene, n_stored);
      Tensor points({m, 3}), gt({m});
      for (int r = 0; r < m; ++r) {
        const SdfSample& s = p.stored.sdf[sample_rng.uniform_int(n_stored)];
        points.at(r, 0) = s.x.x;
        points.at(r, 1) = s.x.y;
        points.at(r, 2) = s.x.z;
        gt.at(r) = s.s_gt;
      }

      const ad::Var f0 = model.initial.features(model.ps, p.stored.image, p.cond.pose);
      const std::optional<ContactVolumePyramid> pyramid = build_scene_pyramid(model, p.cond);

      const int nc = static_cast<int>(p.contact_idx.size());
      Tensor xs({m + nc, 3});
      std::copy(points.v.begin(), points.v.end(), xs.v.begin());
      std::copy(p.contact_points.v.begin(), p.contact_points.v.end(), xs.v.begin() + m * 3);
      const ad::Var s_all = decode_at_points(model, pyramid, f0, xs);
      std::vector<int> lo(m), hi(nc);
      std::iota(lo.begin(), lo.end(), 0);
      std::iota(hi.begin(), hi.end(), m);
      const ad::Var pred_s = ad::gather_rows(s_all, lo);
      const ad::Var hand_sdf =
          nc > 0 ? ad::gather_rows(s_all, hi) : ad::constant(Tensor({1, 1}));

      const ReconLossBreakdown lb = recon_loss(pred_s, gt, p.contact_probs, hand_sdf,
                                               cfg.recon.use_hoi, cfg.recon.clamp_dist);
      const double lv = lb.total->val.at(0);
      if (!std::isfinite(lv)) {
        log << "train_recon: non-finite loss at epoch " << epoch << " scene "
            << order[step] << "; params finite=" << model.ps.all_finite() << "\n";
        throw TrainingError("train_recon: loss diverged (non-finite) at epoch " +
                            std::to_string(epoch));
      }
      ep_loss += lv;
      ep_obj += lb.obj->val.at(0);
      ep_hoi += lb.hoi->val.at(0);
      ad::backward(ad::scale(lb.total, 1.0 / batch));
      if (++in_batch == batch || step + 1 == order.size()) {
        model.ps.adam_step(cfg.recon.lr);
        model.ps.zero_grad();
        in_batch = 0;
      }
    }
    const double n = static_cast<double>(train.size());

    ReconEpochLog el;
    el.epoch = epoch;
    el.loss = ep_loss / n;
    el.loss_obj = ep_obj / n;
    el.loss_hoi = ep_hoi / n;
    el.eval_chamfer_mm = eval_chamfer();
    result.epochs.push_back(el);
    log << "epoch " << epoch << " loss=" << el.loss << " obj=" << el.loss_obj
        << " hoi=" << el.loss_hoi << " eval_chamfer_mm=" << el.eval_chamfer_mm << "\n";

    meta.epoch = epoch;
    const bool better =
        result.best_epoch < 0 ||
        (std::isfinite(el.eval_chamfer_mm) && (!std::isfinite(result.best_chamfer_mm) ||
                                               el.eval_chamfer_mm <= result.best_chamfer_mm));
    if (better) {
      result.best_chamfer_mm = el.eval_chamfer_mm;
      result.best_epoch = epoch;
      meta.best_metric = el.eval_chamfer_mm;
      save_checkpoint(result.best_checkpoint, model.ps, meta);
    }
    save_checkpoint(result.last_checkpoint, model.ps, meta);
  }
  log << "train_recon: best chamfer_mm=" << result.best_chamfer_mm << " at epoch "
      << result.best_epoch << "\n";
  return result;
}

}  // namespace crec
