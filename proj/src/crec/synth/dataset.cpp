#include "crec/synth/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "crec/io/array_io.hpp"
#include "json.hpp"

namespace crec {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
Vec3 vec3_from(const json& j) { return {j.at(0), j.at(1), j.at(2)}; }

json to_json(const RigidTransform& t) {
  return {{"rot", t.rot.m}, {"t", to_json(t.t)}};
}
RigidTransform rigid_from(const json& j) {
  RigidTransform t;
  t.rot.m = j.at("rot");
  t.t = vec3_from(j.at("t"));
  return t;
}

json to_json(const PrimitiveObject& o) {
  json j = {{"kind", kind_name(o.kind)}, {"dims", to_json(o.dims)}, {"pose", to_json(o.pose)}};
  if (!o.children.empty()) {
    json kids = json::array();
    for (const auto& c : o.children) kids.push_back(to_json(c));
    j["children"] = kids;
  }
  return j;
}
PrimitiveObject object_from(const json& j) {
  PrimitiveObject o;
  o.kind = kind_from_name(j.at("kind"));
  o.dims = vec3_from(j.at("dims"));
  o.pose = rigid_from(j.at("pose"));
  if (j.contains("children"))
    for (const auto& c : j.at("children")) o.children.push_back(object_from(c));
  return o;
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DatasetError("dataset: cannot write " + path.string());
  out << std::setprecision(17) << j.dump(1) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("dataset: cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DatasetError("dataset: bad JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace

std::vector<ManifestEntry> Manifest::split(const std::string& name) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries)
    if (e.split == name) out.push_back(e);
  return out;
}

void write_scene(const std::string& dir, const GraspScene& scene, const RenderedImage& image,
                 const std::vector<SdfSample>& sdf) {
  fs::create_directories(dir);
  const fs::path d(dir);

  json sj = {
      {"object", to_json(scene.object)},
      {"wrist", to_json(scene.hand_pose.wrist)},
      {"style", style_name(scene.style)},
      {"seed", scene.rng_seed},
      {"camera",
       {{"fx", scene.camera.fx},
        {"fy", scene.camera.fy},
        {"cx", scene.camera.cx},
        {"cy", scene.camera.cy},
        {"world_to_cam", to_json(scene.camera.world_to_cam)}}},
      {"wrist_frame",
       {{"world_to_wrist", to_json(scene.wrist_frame.world_to_wrist)},
        {"scale", scene.wrist_frame.scale}}},
  };
  json joints = json::array();
  for (const auto& a : scene.hand_pose.joint_axis_angle) joints.push_back(to_json(a));
  sj["joint_axis_angle"] = joints;
  write_json(sj, d / "scene.json");

  json cj;
  json vidx = json::array();
  for (int i = 0; i < static_cast<int>(scene.gt_vertex_contact.size()); ++i)
    if (scene.gt_vertex_contact[i]) vidx.push_back(i);
  cj["contact_vertices"] = vidx;
  json pmask = json::array();
  for (bool b : scene.gt_part_contact) pmask.push_back(b ? 1 : 0);
  cj["part_mask"] = pmask;
  write_json(cj, d / "contacts.json");

  save_array_f32(image.channels, (d / "image.npy").string());

  Tensor st({static_cast<int>(sdf.size()), 4});
  for (size_t i = 0; i < sdf.size(); ++i) {
    st.at(static_cast<int>(i), 0) = sdf[i].x.x;
    st.at(static_cast<int>(i), 1) = sdf[i].x.y;
    st.at(static_cast<int>(i), 2) = sdf[i].x.z;
    st.at(static_cast<int>(i), 3) = sdf[i].s_gt;
  }
  save_array(st, (d / "sdf.npy").string());
}

StoredScene read_scene(const std::string& dir) {
  const fs::path d(dir);
  const json sj = read_json(d / "scene.json");
  const json cj = read_json(d / "contacts.json");

  StoredScene out;
  GraspScene& sc = out.scene;
  sc.object = object_from(sj.at("object"));
  sc.object.validate();
  sc.hand_pose.wrist = rigid_from(sj.at("wrist"));
  const json& joints = sj.at("joint_axis_angle");
  if (joints.size() != kHandJoints) throw DatasetError("dataset: bad joint count in " + dir);
  for (int i = 0; i < kHandJoints; ++i) sc.hand_pose.joint_axis_angle[i] = vec3_from(joints[i]);
  sc.style = style_from_name(sj.at("style"));
  sc.rng_seed = sj.at("seed");
  const json& cam = sj.at("camera");
  sc.camera.fx = cam.at("fx");
  sc.camera.fy = cam.at("fy");
  sc.camera.cx = cam.at("cx");
  sc.camera.cy = cam.at("cy");
  sc.camera.world_to_cam = rigid_from(cam.at("world_to_cam"));
  sc.wrist_frame.world_to_wrist = rigid_from(sj.at("wrist_frame").at("world_to_wrist"));
  sc.wrist_frame.scale = sj.at("wrist_frame").at("scale");

  sc.hand_vertices_posed = pose_hand(builtin_template(), builtin_rig(), sc.hand_pose);

  sc.gt_vertex_contact.assign(HandTemplate::kVertices, false);
  for (int i : cj.at("contact_vertices")) sc.gt_vertex_contact.at(i) = true;
  sc.gt_part_contact.clear();
  for (int b : cj.at("part_mask")) sc.gt_part_contact.push_back(b != 0);
  if (sc.gt_part_contact.size() != HandTemplate::kParts)
    throw DatasetError("dataset: bad part mask in " + dir);

  out.image = load_array((d / "image.npy").string());
  require_shape(out.image, {3, kImageSize, kImageSize}, "dataset image");

  const Tensor st = load_array((d / "sdf.npy").string());
  if (st.rank() != 2 || st.cols() != 4) throw DatasetError("dataset: bad sdf array in " + dir);
  out.sdf.resize(st.rows());
  for (int i = 0; i < st.rows(); ++i)
    out.sdf[i] = {{st.at(i, 0), st.at(i, 1), st.at(i, 2)}, st.at(i, 3)};
  return out;
}

Manifest generate_dataset(const std::string& root, int n_train, int n_test,
                          std::uint64_t base_seed, const GeneratorConfig& config,
                          int sdf_per_scene, double near_fraction) {
  if (n_train < 0 || n_test < 0) throw DatasetError("generate_dataset: negative count");
  fs::create_directories(root);
  Manifest m;
  const int total = n_train + n_test;
  // test block starts at a disjoint seed offset so its object draws are unseen
  const std::uint64_t test_base = base_seed + 1000000;
  int written = 0;
  for (int i = 0; i < total; ++i) {
    const bool is_test = i >= n_train;
    std::uint64_t seed = is_test ? test_base + (i - n_train) : base_seed + i;
    GraspScene sc;
    for (;;) {
      try {
        sc = generate_scene(seed, config);
        break;
      } catch (const GenerationError&) {
        seed += (is_test ? 500000 : total) + 17;  // reseed within the same block
      }
    }
    const RenderedImage img = render(sc);
    Rng srng(seed ^ 0x5bf03635ULL);
    const auto sdf = sample_sdf_points(sc, sdf_per_scene, near_fraction, srng);

    std::ostringstream name;
    name << "scenes/" << std::setw(6) << std::setfill('0') << written;
    write_scene((fs::path(root) / name.str()).string(), sc, img, sdf);
    m.entries.push_back({name.str(), sc.rng_seed, is_test ? "test" : "train"});
    ++written;
  }
  save_manifest(m, root);
  return m;
}

void save_manifest(const Manifest& m, const std::string& root) {
  json j;
  json entries = json::array();
  for (const auto& e : m.entries)
    entries.push_back({{"dir", e.dir}, {"seed", e.seed}, {"split", e.split}});
  j["scenes"] = entries;
  write_json(j, fs::path(root) / "manifest.json");
}

Manifest load_manifest(const std::string& root) {
  const json j = read_json(fs::path(root) / "manifest.json");
  Manifest m;
  for (const auto& e : j.at("scenes"))
    m.entries.push_back({e.at("dir"), e.at("seed"), e.at("split")});
  return m;
}

}  // namespace crec
