#include "crec/synth/scene.hpp"

#include <algorithm>
#include <cmath>

namespace crec {

namespace {

int weighted_pick(Rng& rng, const std::vector<double>& w) {
  double total = 0;
  for (double x : w) total += x;
  double r = rng.uniform() * total;
  for (size_t i = 0; i < w.size(); ++i) {
    r -= w[i];
    if (r <= 0) return static_cast<int>(i);
  }
  return static_cast<int>(w.size()) - 1;
}

Mat3 random_rotation(Rng& rng, double max_angle) {
  Vec3 axis{rng.normal(), rng.normal(), rng.normal()};
  if (axis.norm() < 1e-9) axis = {0, 0, 1};
  return Mat3::axis_angle(axis.normalized() * rng.uniform(0.0, max_angle));
}

// object size scale per grasp style
double style_radius(GraspStyle s, Rng& rng) {
  switch (s) {
    case GraspStyle::Power: return rng.uniform(0.024, 0.038);
    case GraspStyle::Pinch: return rng.uniform(0.009, 0.016);
    case GraspStyle::Tripod: return rng.uniform(0.014, 0.024);
    case GraspStyle::Lateral: return rng.uniform(0.012, 0.022);
  }
  return 0.02;
}

PrimitiveObject make_object(PrimitiveObject::Kind kind, GraspStyle style, Rng& rng) {
  PrimitiveObject o;
  o.kind = kind;
  const double r = style_radius(style, rng);
  switch (kind) {
    case PrimitiveObject::Kind::Sphere:
      o.dims = {r, 0, 0};
      break;
    case PrimitiveObject::Kind::Box:
      o.dims = {r * rng.uniform(0.7, 1.0), r * rng.uniform(0.7, 1.0), r * rng.uniform(0.7, 1.0)};
      break;
    case PrimitiveObject::Kind::Cylinder:
      o.dims = {r * rng.uniform(0.6, 0.9), r * rng.uniform(0.8, 1.4), 0};
      break;
    case PrimitiveObject::Kind::Capsule:
      o.dims = {r * rng.uniform(0.55, 0.75), r * rng.uniform(0.6, 1.0), 0};
      break;
    case PrimitiveObject::Kind::Union: {
      PrimitiveObject a, b;
      a.kind = PrimitiveObject::Kind::Sphere;
      a.dims = {r * rng.uniform(0.8, 1.0), 0, 0};
      b.kind = PrimitiveObject::Kind::Box;
      b.dims = {r * rng.uniform(0.5, 0.8), r * rng.uniform(0.5, 0.8), r * rng.uniform(0.5, 0.8)};
      b.pose.t = {r * rng.uniform(0.4, 0.8), 0, 0};
      o.children = {a, b};
      break;
    }
  }
  o.pose.rot = random_rotation(rng, M_PI);
  return o;
}

// hand-frame placement target per style (palm side is +z, fingers +y)
Vec3 style_anchor(GraspStyle s, Rng& rng) {
  switch (s) {
    case GraspStyle::Power:
      return {rng.uniform(-0.018, 0.006), rng.uniform(0.045, 0.075), 0.013};
    case GraspStyle::Pinch:
      return {rng.uniform(-0.045, -0.028), rng.uniform(0.095, 0.115), rng.uniform(0.012, 0.022)};
    case GraspStyle::Tripod:
      return {rng.uniform(-0.028, -0.008), rng.uniform(0.09, 0.11), rng.uniform(0.014, 0.024)};
    case GraspStyle::Lateral:
      return {rng.uniform(-0.062, -0.045), rng.uniform(0.04, 0.065), rng.uniform(0.008, 0.018)};
  }
  return {0, 0.06, 0.02};
}

std::array<bool, kFingers> involved_fingers(GraspStyle s) {
  switch (s) {
    case GraspStyle::Power: return {true, true, true, true, true};
    case GraspStyle::Pinch: return {true, true, false, false, false};
    case GraspStyle::Tripod: return {true, true, true, false, false};
    case GraspStyle::Lateral: return {true, false, false, false, false};
  }
  return {true, true, true, true, true};
}

void set_finger_curl(HandPose& pose, const HandRig& rig, int finger, double fraction) {
  static const double seg_gain[3] = {1.0, 0.9, 0.7};
  for (int s = 0; s < 3; ++s) {
    const int j = finger_joint(finger, s);
    pose.joint_axis_angle[j] = rig.curl_axis[j] * (fraction * rig.curl_limit[j] * seg_gain[s]);
  }
}

double finger_min_sdf(const HandTemplate& t, const HandRig& rig, const HandPose& pose,
                      const PrimitiveObject& obj, int finger) {
  const Tensor posed = pose_hand(t, rig, pose);
  double best = 1e300;
  for (int i = 0; i < HandTemplate::kVertices; ++i) {
    if (rig.vertex_finger[i] != finger) continue;
    best = std::min(best, object_sdf(obj, {posed.at(i, 0), posed.at(i, 1), posed.at(i, 2)}));
  }
  return best;
}

Camera make_camera(Rng& rng, const Vec3& target) {
  Camera cam;
  cam.fx = cam.fy = rng.uniform(280, 340);
  // viewpoint on a sphere around the scene
  const double az = rng.uniform(0, 2 * M_PI);
  const double el = rng.uniform(0.15, 1.2);
  const double dist = rng.uniform(0.36, 0.5);
  const Vec3 eye = target + Vec3{std::cos(az) * std::cos(el), std::sin(az) * std::cos(el),
                                 std::sin(el)} *
                                dist;
  const Vec3 fwd = (target - eye).normalized();
  Vec3 up{0, 0, 1};
  if (std::fabs(fwd.dot(up)) > 0.98) up = {0, 1, 0};
  const Vec3 right = up.cross(fwd).normalized();
  const Vec3 down = fwd.cross(right);
  Mat3 r;
  r.m = {right.x, right.y, right.z, down.x, down.y, down.z, fwd.x, fwd.y, fwd.z};
  cam.world_to_cam = {r, -(r * eye)};
  return cam;
}

}  // namespace

TriMesh GraspScene::hand_mesh() const {
  const HandTemplate& t = builtin_template();
  TriMesh m;
  m.vertices.reserve(HandTemplate::kVertices);
  for (int i = 0; i < HandTemplate::kVertices; ++i)
    m.vertices.push_back({hand_vertices_posed.at(i, 0), hand_vertices_posed.at(i, 1),
                          hand_vertices_posed.at(i, 2)});
  m.faces = t.faces;
  return m;
}

TriMesh GraspScene::object_mesh(int resolution) const { return tessellate(object, resolution); }

void label_contacts(const PrimitiveObject& obj, const Tensor& hand_vertices, double delta,
                    std::vector<bool>& vertex_contact, std::vector<bool>& part_contact) {
  const HandTemplate& t = builtin_template();
  vertex_contact.assign(HandTemplate::kVertices, false);
  part_contact.assign(HandTemplate::kParts, false);
  for (int i = 0; i < HandTemplate::kVertices; ++i) {
    const double d =
        object_sdf(obj, {hand_vertices.at(i, 0), hand_vertices.at(i, 1), hand_vertices.at(i, 2)});
    if (d <= delta) {
      vertex_contact[i] = true;
      part_contact[t.part_labels[i]] = true;
    }
  }
}

GraspScene generate_scene(std::uint64_t seed, const GeneratorConfig& config) {
  const HandTemplate& tmpl = builtin_template();
  const HandRig& rig = builtin_rig();
  Rng rng(seed * 0x9e3779b97f4a7c15ULL + 0xda3e39cb94b95bdbULL);

  const auto style = static_cast<GraspStyle>(weighted_pick(rng, config.style_weights));
  const auto kind = static_cast<PrimitiveObject::Kind>(weighted_pick(rng, config.kind_weights));

  // rare variant: object rests on the back of the hand so every part
  // (including the back) has nonzero contact frequency over a large corpus
  const bool back_rest = style == GraspStyle::Power && rng.uniform() < 0.15;

  for (int attempt = 0; attempt < config.max_close_attempts; ++attempt) {
    PrimitiveObject obj = make_object(kind, style, rng);
    Vec3 anchor = style_anchor(style, rng);
    if (back_rest) {
      obj.pose.t = {anchor.x, anchor.y, -(obj.bounding_radius() + 0.004)};
      const Vec3 probe{anchor.x, anchor.y, -0.012};
      const double gap = rng.uniform(0.0, 0.003);
      while (object_sdf(obj, probe) > gap && obj.pose.t.z < -0.004) obj.pose.t.z += 0.001;
    } else if (style == GraspStyle::Power) {
      // drop the object toward the palm plane until it nearly rests on it
      obj.pose.t = anchor + Vec3{0, 0, obj.bounding_radius() + 0.004};
      const Vec3 probe{anchor.x, anchor.y, 0.013};
      const double gap = rng.uniform(0.001, 0.004);
      while (object_sdf(obj, probe) > gap && obj.pose.t.z > 0.005) obj.pose.t.z -= 0.001;
    } else {
      obj.pose.t = anchor;
    }

    HandPose pose;
    const auto involved = involved_fingers(style);
    for (int f = 0; f < kFingers; ++f)
      if (!involved[f]) set_finger_curl(pose, rig, f, style == GraspStyle::Lateral ? 0.25 : 0.05);
    // lateral grasps pin the object against the curled index side
    if (style == GraspStyle::Lateral) set_finger_curl(pose, rig, 1, 0.45);

    // close involved fingers until they touch
    const double close_target = 0.0015;
    for (int f = 0; f < kFingers; ++f) {
      if (back_rest) {
        set_finger_curl(pose, rig, f, 0.08);
        continue;
      }
      if (!involved[f]) continue;
      double c = 0;
      while (c < 1.0 && finger_min_sdf(tmpl, rig, pose, obj, f) > close_target) {
        c += 0.02;
        set_finger_curl(pose, rig, f, std::min(c, 1.0));
      }
    }

    // rigid placement of the whole grasp in the world
    RigidTransform wrist;
    wrist.rot = random_rotation(rng, 0.6);
    wrist.t = {rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05)};
    pose.wrist = wrist;

    GraspScene scene;
    scene.object = obj;
    scene.object.pose = obj.pose.then(wrist);
    scene.object.validate();
    scene.hand_pose = pose;
    scene.hand_vertices_posed = pose_hand(tmpl, rig, pose);
    scene.style = style;
    scene.rng_seed = seed;

    label_contacts(scene.object, scene.hand_vertices_posed, config.contact_delta,
                   scene.gt_vertex_contact, scene.gt_part_contact);
    int n_contact = 0;
    for (bool b : scene.gt_vertex_contact) n_contact += b;
    if (n_contact < config.min_contact_vertices) continue;

    // wrist-normalized frame: hand inside [-0.5,0.5]^3
    scene.wrist_frame.world_to_wrist = wrist.inverse();
    double max_abs = 1e-9;
    for (int i = 0; i < HandTemplate::kVertices; ++i) {
      const Vec3 w = scene.wrist_frame.world_to_wrist.apply({scene.hand_vertices_posed.at(i, 0),
                                                             scene.hand_vertices_posed.at(i, 1),
                                                             scene.hand_vertices_posed.at(i, 2)});
      max_abs = std::max({max_abs, std::fabs(w.x), std::fabs(w.y), std::fabs(w.z)});
    }
    scene.wrist_frame.scale = 0.495 / max_abs;

    Vec3 centroid{0, 0, 0};
    for (int i = 0; i < HandTemplate::kVertices; ++i)
      centroid += Vec3{scene.hand_vertices_posed.at(i, 0), scene.hand_vertices_posed.at(i, 1),
                       scene.hand_vertices_posed.at(i, 2)};
    centroid = centroid / HandTemplate::kVertices;
    scene.camera = make_camera(rng, (centroid + scene.object.pose.t) / 2.0);
    return scene;
  }
  throw GenerationError("generate_scene: no contact after max_close_attempts, seed " +
                        std::to_string(seed));
}

RenderedImage render(const GraspScene& scene) {
  return render_scene(scene.hand_mesh(), scene.object_mesh(), scene.camera);
}

std::vector<SdfSample> sample_sdf_points(const GraspScene& scene, int n, double near_fraction,
                                         Rng& rng, double near_sigma_m) {
  if (n <= 0) throw std::invalid_argument("sample_sdf_points: n must be positive");
  if (near_fraction < 0 || near_fraction > 1)
    throw std::invalid_argument("sample_sdf_points: near_fraction outside [0,1]");
  const int n_near = static_cast<int>(std::floor(near_fraction * n));
  std::vector<SdfSample> out;
  out.reserve(n);
  if (n_near > 0) {
    const TriMesh surf = scene.object_mesh(32);
    const auto pts = sample_surface(surf, n_near, rng);
    for (const auto& p : pts) {
      const Vec3 jittered =
          p + Vec3{rng.normal(0, near_sigma_m), rng.normal(0, near_sigma_m),
                   rng.normal(0, near_sigma_m)};
      out.push_back({scene.wrist_frame.normalize(jittered),
                     object_sdf(scene.object, jittered) * scene.wrist_frame.scale});
    }
  }
  for (int i = n_near; i < n; ++i) {
    const Vec3 xn{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    out.push_back(
        {xn, object_sdf(scene.object, scene.wrist_frame.denormalize(xn)) * scene.wrist_frame.scale});
  }
  return out;
}

const char* style_name(GraspStyle s) {
  switch (s) {
    case GraspStyle::Power: return "power";
    case GraspStyle::Pinch: return "pinch";
    case GraspStyle::Tripod: return "tripod";
    case GraspStyle::Lateral: return "lateral";
  }
  return "?";
}

GraspStyle style_from_name(const std::string& s) {
  if (s == "power") return GraspStyle::Power;
  if (s == "pinch") return GraspStyle::Pinch;
  if (s == "tripod") return GraspStyle::Tripod;
  if (s == "lateral") return GraspStyle::Lateral;
  throw std::runtime_error("unknown grasp style: " + s);
}

}  // namespace crec
