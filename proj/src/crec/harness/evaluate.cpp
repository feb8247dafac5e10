#include "crec/harness/evaluate.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "json.hpp"

namespace crec {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ReconMetrics scene_recon_metrics(ReconModel& model, const StoredScene& scene,
                                 const SceneConditioning& cond, const TriMesh& recon_mesh) {
  const ExperimentConfig& cfg = model.cfg;
  ReconMetrics m;
  const TriMesh gt = scene.scene.object_mesh(24);
  m.chamfer_mm = chamfer_distance(recon_mesh, gt, cfg.recon.eval_samples);
  m.f_at_5mm = f_score(recon_mesh, gt, 5.0, cfg.recon.eval_samples);
  m.f_at_10mm = f_score(recon_mesh, gt, 10.0, cfg.recon.eval_samples);

  // Penetration and overlap against the decoded SDF itself (in meters), with
  // the ground-truth posed hand.
  const ad::Var f0 = model.initial.features(model.ps, scene.image, cond.pose);
  const std::optional<ContactVolumePyramid> pyramid = build_scene_pyramid(model, cond);
  const double scale = scene.scene.wrist_frame.scale;

  const Tensor& hand_world = scene.scene.hand_vertices_posed;
  Tensor hand_norm({HandTemplate::kVertices, 3});
  for (int i = 0; i < HandTemplate::kVertices; ++i) {
    const Vec3 p = scene.scene.wrist_frame.normalize(
        {hand_world.at(i, 0), hand_world.at(i, 1), hand_world.at(i, 2)});
    hand_norm.at(i, 0) = p.x;
    hand_norm.at(i, 1) = p.y;
    hand_norm.at(i, 2) = p.z;
  }
  const Tensor s = decode_at_points(model, pyramid, f0, hand_norm)->val;
  double depth = 0;
  for (int i = 0; i < HandTemplate::kVertices; ++i) depth = std::max(depth, -s.at(i, 0));
  m.penetration_depth_cm = depth / scale * 100.0;

  // Overlap of the decoded object with the hand volume; the hand mesh is not
  // strictly closed, so its inside test uses the generalized winding number.
  const TriMesh hand_mesh = scene.scene.hand_mesh();
  auto object_sdf_m = [&](const Vec3& world) {
    const Vec3 q = scene.scene.wrist_frame.normalize(world);
    Tensor pt({1, 3});
    pt.at(0, 0) = q.x;
    pt.at(0, 1) = q.y;
    pt.at(0, 2) = q.z;
    return decode_at_points(model, pyramid, f0, pt)->val.at(0, 0) / scale;
  };
  auto hand_inside_m = [&](const Vec3& world) {
    return 0.5 - std::fabs(winding_number(world, hand_mesh));
  };
  Vec3 hlo, hhi, olo, ohi;
  hand_mesh.bounds(hlo, hhi);
  recon_mesh.bounds(olo, ohi);
  const Vec3 lo{std::max(hlo.x, olo.x), std::max(hlo.y, olo.y), std::max(hlo.z, olo.z)};
  const Vec3 hi{std::min(hhi.x, ohi.x), std::min(hhi.y, ohi.y), std::min(hhi.z, ohi.z)};
  m.intersection_volume_cm3 = intersection_volume_cm3(object_sdf_m, hand_inside_m, lo, hi, 0.004);
  return m;
}

ContactMetrics micro_prf(const std::vector<std::vector<bool>>& pred,
                         const std::vector<std::vector<bool>>& gt) {
  std::vector<bool> p, g;
  for (const auto& v : pred) p.insert(p.end(), v.begin(), v.end());
  for (const auto& v : gt) g.insert(g.end(), v.begin(), v.end());
  return contact_prf(p, g);
}

}  // namespace

ReconstructReport reconstruct_to_files(ReconModel& model, const ContactModel* contact,
                                       const StoredScene& scene, const std::string& out_prefix) {
  const SceneConditioning cond = condition_scene(model.cfg, scene, contact);
  const MeshResult mr = reconstruct_object(model, scene, cond, model.cfg.recon.grid_res);

  ReconstructReport rep;
  rep.mesh_path = out_prefix + ".obj";
  rep.report_path = out_prefix + ".json";
  rep.empty_mesh = mr.empty || mr.mesh.empty();
  save_obj(mr.mesh, rep.mesh_path);
  if (!rep.empty_mesh)
    rep.chamfer_mm = chamfer_distance(mr.mesh, scene.scene.object_mesh(24),
                                      model.cfg.recon.eval_samples);

  json j{{"mesh", rep.mesh_path},
         {"empty_mesh", rep.empty_mesh},
         {"chamfer_mm", rep.empty_mesh ? json() : json(rep.chamfer_mm)},
         {"config_hash", config_hash(model.cfg)},
         {"scene_seed", scene.scene.rng_seed}};
  std::ofstream out(rep.report_path);
  if (!out) throw TrainingError("reconstruct: cannot write " + rep.report_path);
  out << j.dump(2) << "\n";
  return rep;
}

EvaluateSummary aggregate_records(std::vector<SceneEvalRecord> records, bool has_contact) {
  EvaluateSummary s;
  s.has_contact = has_contact;
  if (records.empty()) throw TrainingError("evaluate: no records to aggregate");
  for (const SceneEvalRecord& r : records)
    if (r.config_hash != records.front().config_hash)
      throw ConfigError("evaluate: refusing to aggregate records from different configs (" +
                        r.config_hash + " vs " + records.front().config_hash + ")");
  int ok = 0;
  for (const SceneEvalRecord& r : records) {
    if (!r.ok) {
      ++s.n_failed;
      continue;
    }
    ++ok;
    s.mean_recon.chamfer_mm += r.recon.chamfer_mm;
    s.mean_recon.f_at_5mm += r.recon.f_at_5mm;
    s.mean_recon.f_at_10mm += r.recon.f_at_10mm;
    s.mean_recon.penetration_depth_cm += r.recon.penetration_depth_cm;
    s.mean_recon.intersection_volume_cm3 += r.recon.intersection_volume_cm3;
  }
  if (ok > 0) {
    s.mean_recon.chamfer_mm /= ok;
    s.mean_recon.f_at_5mm /= ok;
    s.mean_recon.f_at_10mm /= ok;
    s.mean_recon.penetration_depth_cm /= ok;
    s.mean_recon.intersection_volume_cm3 /= ok;
  }
  s.records = std::move(records);
  return s;
}

EvaluateSummary evaluate_split(ReconModel& model, const ContactModel* contact,
                               const std::string& split, std::ostream& log, int max_scenes) {
  const Manifest manifest = load_manifest(model.cfg.data.root);
  std::vector<ManifestEntry> entries = manifest.split(split);
  if (entries.empty()) throw TrainingError("evaluate: empty split '" + split + "'");
  if (max_scenes >= 0 && static_cast<int>(entries.size()) > max_scenes)
    entries.resize(max_scenes);

  const std::string hash = config_hash(model.cfg);
  std::vector<SceneEvalRecord> records;
  std::vector<std::vector<bool>> pred_part, gt_part, pred_vertex, gt_vertex;
  for (const ManifestEntry& e : entries) {
    SceneEvalRecord rec;
    rec.scene_dir = e.dir;
    rec.config_hash = hash;
    try {
      const StoredScene scene = read_scene((fs::path(model.cfg.data.root) / e.dir).string());
      if (contact) {
        nn::ParamStore& cps = const_cast<nn::ParamStore&>(contact->ps);
        const ContactState st =
            contact->net.predict(cps, scene.image, contact->cfg.contact.multi_level);
        const double tau = contact->cfg.contact.threshold;
        pred_part.push_back(threshold_contacts(st.c_part, tau));
        gt_part.push_back(scene.scene.gt_part_contact);
        pred_vertex.push_back(threshold_contacts(st.c_vertex, tau));
        gt_vertex.push_back(scene.scene.gt_vertex_contact);
        rec.contact_part = contact_prf(pred_part.back(), gt_part.back());
        rec.contact_vertex = contact_prf(pred_vertex.back(), gt_vertex.back());
      }
      const SceneConditioning cond = condition_scene(model.cfg, scene, contact);
      const MeshResult mr = reconstruct_object(model, scene, cond, model.cfg.recon.grid_res);
      if (mr.empty || mr.mesh.empty()) {
        rec.empty_mesh = true;
        rec.error = "empty reconstruction";
      } else {
        rec.recon = scene_recon_metrics(model, scene, cond, mr.mesh);
        rec.ok = true;
      }
    } catch (const std::exception& ex) {
      rec.error = ex.what();
    }
    if (!rec.ok) log << "evaluate: scene " << e.dir << " failed: " << rec.error << "\n";
    records.push_back(std::move(rec));
  }

  EvaluateSummary s = aggregate_records(std::move(records), contact != nullptr);
  if (contact) {
    s.mean_part = micro_prf(pred_part, gt_part);
    s.mean_vertex = micro_prf(pred_vertex, gt_vertex);
  }
  log << "evaluate: " << s.records.size() - s.n_failed << "/" << s.records.size()
      << " scenes ok, mean chamfer_mm=" << s.mean_recon.chamfer_mm
      << " F@5=" << s.mean_recon.f_at_5mm << " pen_cm=" << s.mean_recon.penetration_depth_cm
      << "\n";
  return s;
}

void write_eval_reports(const EvaluateSummary& summary, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::ofstream csv(fs::path(out_dir) / "report.csv");
  csv << "scene,ok,empty_mesh,part_f1,vertex_f1,chamfer_mm,f_at_5mm,f_at_10mm,"
         "penetration_cm,intersection_cm3,error\n";
  for (const SceneEvalRecord& r : summary.records) {
    csv << r.scene_dir << "," << r.ok << "," << r.empty_mesh << "," << r.contact_part.f1 << ","
        << r.contact_vertex.f1 << "," << r.recon.chamfer_mm << "," << r.recon.f_at_5mm << ","
        << r.recon.f_at_10mm << "," << r.recon.penetration_depth_cm << ","
        << r.recon.intersection_volume_cm3 << ",\"" << r.error << "\"\n";
  }

  json jr = json::array();
  for (const SceneEvalRecord& r : summary.records)
    jr.push_back({{"scene", r.scene_dir},
                  {"ok", r.ok},
                  {"empty_mesh", r.empty_mesh},
                  {"error", r.error},
                  {"part_f1", r.contact_part.f1},
                  {"vertex_f1", r.contact_vertex.f1},
                  {"chamfer_mm", r.recon.chamfer_mm},
                  {"f_at_5mm", r.recon.f_at_5mm},
                  {"f_at_10mm", r.recon.f_at_10mm},
                  {"penetration_cm", r.recon.penetration_depth_cm},
                  {"intersection_cm3", r.recon.intersection_volume_cm3},
                  {"config_hash", r.config_hash}});
  json j{{"records", jr},
         {"n_failed", summary.n_failed},
         {"aggregate",
          {{"part_f1", summary.mean_part.f1},
           {"vertex_f1", summary.mean_vertex.f1},
           {"chamfer_mm", summary.mean_recon.chamfer_mm},
           {"f_at_5mm", summary.mean_recon.f_at_5mm},
           {"f_at_10mm", summary.mean_recon.f_at_10mm},
           {"penetration_cm", summary.mean_recon.penetration_depth_cm},
           {"intersection_cm3", summary.mean_recon.intersection_volume_cm3}}}};
  std::ofstream jf(fs::path(out_dir) / "report.json");
  jf << j.dump(2) << "\n";
}

std::vector<AblationRow> run_ablation(const ExperimentConfig& base,
                                      const std::string& contact_checkpoint, std::ostream& log) {
  struct Arm {
    const char* name;
    ContactSource source;
    bool use_hoi;
  };
  const Arm arms[] = {
      {"baseline_no_contact", ContactSource::None, true},
      {"vertex_no_hoi", ContactSource::Vertex, false},
      {"vertex_with_hoi", ContactSource::Vertex, true},
      {"part_propagated_with_hoi", ContactSource::PartPropagated, true},
      {"ground_truth_with_hoi", ContactSource::GroundTruth, true},
  };
  std::vector<AblationRow> rows;
  for (const Arm& arm : arms) {
    AblationRow row;
    row.name = arm.name;
    row.cfg = base;
    row.cfg.recon.contact_source = arm.source;
    row.cfg.recon.use_hoi = arm.use_hoi;
    row.cfg.out_dir = (fs::path(base.out_dir) / arm.name).string();
    log << "ablation arm " << arm.name << "\n";
    const bool needs_net =
        arm.source == ContactSource::Vertex || arm.source == ContactSource::PartPropagated;
    const TrainReconResult tr =
        train_recon(row.cfg, needs_net ? contact_checkpoint : std::string(), log);
    row.best_chamfer_mm = tr.best_chamfer_mm;
    ReconModel model = load_recon_model(tr.best_checkpoint);
    std::optional<ContactModel> contact;
    if (needs_net) contact.emplace(load_contact_model(contact_checkpoint));
    row.eval = evaluate_split(model, contact ? &*contact : nullptr, "test", log,
                              base.recon.eval_scenes);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_ablation_table(const std::vector<AblationRow>& rows, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::ofstream csv(fs::path(out_dir) / "ablation.csv");
  csv << "arm,contact_source,use_hoi,chamfer_mm,f_at_5mm,f_at_10mm,penetration_cm,"
         "intersection_cm3,n_failed\n";
  json jr = json::array();
  for (const AblationRow& r : rows) {
    csv << r.name << "," << contact_source_name(r.cfg.recon.contact_source) << ","
        << r.cfg.recon.use_hoi << "," << r.eval.mean_recon.chamfer_mm << ","
        << r.eval.mean_recon.f_at_5mm << "," << r.eval.mean_recon.f_at_10mm << ","
        << r.eval.mean_recon.penetration_depth_cm << ","
        << r.eval.mean_recon.intersection_volume_cm3 << "," << r.eval.n_failed << "\n";
    jr.push_back({{"arm", r.name},
                  {"contact_source", contact_source_name(r.cfg.recon.contact_source)},
                  {"use_hoi", r.cfg.recon.use_hoi},
                  {"chamfer_mm", r.eval.mean_recon.chamfer_mm},
                  {"f_at_5mm", r.eval.mean_recon.f_at_5mm},
                  {"f_at_10mm", r.eval.mean_recon.f_at_10mm},
                  {"penetration_cm", r.eval.mean_recon.penetration_depth_cm},
                  {"intersection_cm3", r.eval.mean_recon.intersection_volume_cm3},
                  {"config_hash", config_hash(r.cfg)}});
  }
  std::ofstream jf(fs::path(out_dir) / "ablation.json");
  jf << json{{"arms", jr}}.dump(2) << "\n";
}

}  // namespace crec
