#include "crec/hand/hand_template.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "crec/core/kernels.hpp"
#include "crec/hand/hand_rig.hpp"

namespace crec {

namespace {

struct FingerSpec {
  Vec3 base;
  Vec3 dir;  // unit
  std::array<double, 3> seg_len;
  double r_base, r_tip;
  int rings;  // vertex rings along the finger, 8 vertices each
};

constexpr int kRingVerts = 8;
const Vec3 kPalmCenterPos{0.0, 0.045, 0.0};
constexpr double kPalmAx = 0.042, kPalmAy = 0.055, kPalmAz = 0.014;
constexpr int kPalmStacks = 10, kPalmSlices = 35;  // (10-1)*35+2 = 317 vertices

std::array<FingerSpec, kFingers> finger_specs() {
  auto mk = [](Vec3 base, Vec3 dir, std::array<double, 3> len, double rb, double rt, int rings) {
    return FingerSpec{base, dir.normalized(), len, rb, rt, rings};
  };
  return {
      mk({-0.040, 0.015, 0.002}, {-0.65, 0.70, 0.15}, {0.032, 0.026, 0.024}, 0.011, 0.008, 9),
      mk({-0.030, 0.095, 0.0}, {-0.08, 1.0, 0.0}, {0.032, 0.024, 0.021}, 0.009, 0.0065, 12),
      mk({-0.010, 0.100, 0.0}, {0.0, 1.0, 0.0}, {0.034, 0.026, 0.022}, 0.009, 0.0065, 12),
      mk({0.012, 0.095, 0.0}, {0.07, 1.0, 0.0}, {0.031, 0.024, 0.021}, 0.0085, 0.006, 12),
      mk({0.032, 0.085, 0.0}, {0.15, 1.0, 0.0}, {0.026, 0.020, 0.018}, 0.0075, 0.0055, 12),
  };
}

// prox / mid / dist labels per finger; thumb merges mid+dist
int finger_segment_label(int finger, double arc, const FingerSpec& fs) {
  const double l1 = fs.seg_len[0], l2 = fs.seg_len[1];
  if (finger == 0) return arc < 0.45 * (l1 + l2 + fs.seg_len[2]) ? 4 : 5;
  const int base = 6 + 3 * (finger - 1);
  if (arc < l1) return base;
  if (arc < l1 + l2) return base + 1;
  return base + 2;
}

struct BuiltinHand {
  HandTemplate tmpl;
  HandRig rig;
};

void build_adjacency(HandTemplate& t) {
  t.vertex_adjacency = Tensor({HandTemplate::kVertices, HandTemplate::kVertices});
  t.part_adjacency = Tensor({HandTemplate::kParts, HandTemplate::kParts});
  for (const auto& f : t.faces)
    for (int e = 0; e < 3; ++e) {
      const int u = f[e], v = f[(e + 1) % 3];
      if (u == v) continue;
      t.vertex_adjacency.at(u, v) = 1.0;
      t.vertex_adjacency.at(v, u) = 1.0;
      const int a = t.part_labels[u], b = t.part_labels[v];
      if (a != b) {
        t.part_adjacency.at(a, b) = 1.0;
        t.part_adjacency.at(b, a) = 1.0;
      }
    }
}

void build_part_centers(HandTemplate& t) {
  t.part_centers = Tensor({HandTemplate::kParts, 3});
  std::array<int, HandTemplate::kParts> cnt{};
  for (int i = 0; i < HandTemplate::kVertices; ++i) {
    const int p = t.part_labels[i];
    ++cnt[p];
    for (int k = 0; k < 3; ++k) t.part_centers.at(p, k) += t.vertices.at(i, k);
  }
  for (int p = 0; p < HandTemplate::kParts; ++p) {
    if (cnt[p] == 0) throw std::runtime_error("hand template: part " + std::to_string(p) + " empty");
    for (int k = 0; k < 3; ++k) t.part_centers.at(p, k) /= cnt[p];
  }
}

Vec3 vertex_at(const Tensor& v, int i) { return {v.at(i, 0), v.at(i, 1), v.at(i, 2)}; }

void build_sampling(HandTemplate& t) {
  const int n = HandTemplate::kVertices, m = HandTemplate::kSubVertices;
  // farthest point sampling of 195 sub-mesh nodes
  std::vector<double> dist(n, 1e30);
  std::vector<int> centers;
  centers.reserve(m);
  int next = 0;
  for (int c = 0; c < m; ++c) {
    centers.push_back(next);
    const Vec3 p = vertex_at(t.vertices, next);
    int far_idx = 0;
    double far_d = -1;
    for (int i = 0; i < n; ++i) {
      const double d = (vertex_at(t.vertices, i) - p).norm2();
      dist[i] = std::min(dist[i], d);
      if (dist[i] > far_d) {
        far_d = dist[i];
        far_idx = i;
      }
    }
    next = far_idx;
  }
  t.sub_indices = centers;

  // nearest-center clustering
  std::vector<int> cluster(n, 0);
  for (int i = 0; i < n; ++i) {
    const Vec3 p = vertex_at(t.vertices, i);
    double best = 1e30;
    for (int c = 0; c < m; ++c) {
      const double d = (vertex_at(t.vertices, centers[c]) - p).norm2();
      if (d < best - 1e-18) {
        best = d;
        cluster[i] = c;
      }
    }
  }

  t.downsample_matrix = Tensor({m, n});
  std::vector<int> cluster_size(m, 0);
  for (int i = 0; i < n; ++i) ++cluster_size[cluster[i]];
  for (int i = 0; i < n; ++i) t.downsample_matrix.at(cluster[i], i) = 1.0 / cluster_size[cluster[i]];

  // upsample: inverse-distance blend over the 3 nearest sub-mesh nodes
  t.upsample_matrix = Tensor({n, m});
  for (int i = 0; i < n; ++i) {
    const Vec3 p = vertex_at(t.vertices, i);
    std::array<std::pair<double, int>, 3> best{{{1e30, -1}, {1e30, -1}, {1e30, -1}}};
    for (int c = 0; c < m; ++c) {
      const double d = (vertex_at(t.vertices, centers[c]) - p).norm();
      if (d < best[2].first) {
        best[2] = {d, c};
        std::sort(best.begin(), best.end());
      }
    }
    if (best[0].first < 1e-12) {
      t.upsample_matrix.at(i, best[0].second) = 1.0;
      continue;
    }
    double wsum = 0;
    std::array<double, 3> w{};
    for (int k = 0; k < 3; ++k) wsum += (w[k] = 1.0 / (best[k].first + 1e-9));
    for (int k = 0; k < 3; ++k) t.upsample_matrix.at(i, best[k].second) += w[k] / wsum;
  }

  // induced sub-mesh adjacency
  t.sub_adjacency = Tensor({m, m});
  for (const auto& f : t.faces)
    for (int e = 0; e < 3; ++e) {
      const int a = cluster[f[e]], b = cluster[f[(e + 1) % 3]];
      if (a != b) {
        t.sub_adjacency.at(a, b) = 1.0;
        t.sub_adjacency.at(b, a) = 1.0;
      }
    }
}

void validate_template(const HandTemplate& t) {
  if (t.vertices.shape != std::vector<int>{HandTemplate::kVertices, 3})
    throw DimensionError("hand template: expected 778 vertices, got " +
                         std::to_string(t.vertices.rows()));
  std::array<bool, HandTemplate::kParts> seen{};
  for (int l : t.part_labels) {
    if (l < 0 || l >= HandTemplate::kParts)
      throw std::runtime_error("hand template: part label out of range");
    seen[l] = true;
  }
  for (int p = 0; p < HandTemplate::kParts; ++p)
    if (!seen[p]) throw std::runtime_error("hand template: part " + std::to_string(p) + " unused");
  for (int i = 0; i < HandTemplate::kSubVertices; ++i) {
    double s = 0;
    for (int j = 0; j < HandTemplate::kVertices; ++j) s += t.downsample_matrix.at(i, j);
    if (std::fabs(s - 1.0) > 1e-9)
      throw std::runtime_error("hand template: downsample row not stochastic");
  }
  for (int i = 0; i < HandTemplate::kVertices; ++i) {
    double s = 0;
    for (int j = 0; j < HandTemplate::kSubVertices; ++j) s += t.upsample_matrix.at(i, j);
    if (std::fabs(s - 1.0) > 1e-9)
      throw std::runtime_error("hand template: upsample row not stochastic");
  }
}

BuiltinHand build_builtin() {
  BuiltinHand out;
  HandTemplate& t = out.tmpl;
  HandRig& rig = out.rig;
  const auto fingers = finger_specs();

  std::vector<Vec3> verts;
  verts.reserve(HandTemplate::kVertices);
  t.part_labels.clear();
  rig.skin_joint.clear();
  rig.skin_weight.clear();
  rig.vertex_finger.clear();

  auto push_vertex = [&](const Vec3& p, int label, int j0, double w0, int j1, double w1,
                         int finger) {
    verts.push_back(p);
    t.part_labels.push_back(label);
    rig.skin_joint.push_back({j0, j1});
    rig.skin_weight.push_back({w0, w1});
    rig.vertex_finger.push_back(finger);
  };

  // ---- palm: flattened uv-sphere, poles toward wrist and fingers ----
  auto palm_label = [&](const Vec3& local) {
    if (local.z < 0) return static_cast<int>(kBackOfHand);
    if (local.x < -0.015 && local.y < 0.015) return static_cast<int>(kThenar);
    if (local.x > 0.018) return static_cast<int>(kHypothenar);
    return static_cast<int>(kPalmCenter);
  };
  auto palm_point = [&](double phi, double theta) {
    return kPalmCenterPos + Vec3{kPalmAx * std::sin(phi) * std::cos(theta),
                                 kPalmAy * std::cos(phi),
                                 kPalmAz * std::sin(phi) * std::sin(theta)};
  };
  {
    const Vec3 north = kPalmCenterPos + Vec3{0, kPalmAy, 0};
    push_vertex(north, kPalmCenter, 0, 1.0, -1, 0.0, -1);
    for (int s = 1; s < kPalmStacks; ++s) {
      const double phi = M_PI * s / kPalmStacks;
      for (int l = 0; l < kPalmSlices; ++l) {
        const double theta = 2.0 * M_PI * l / kPalmSlices;
        const Vec3 p = palm_point(phi, theta);
        push_vertex(p, palm_label(p - kPalmCenterPos), 0, 1.0, -1, 0.0, -1);
      }
    }
    const Vec3 south = kPalmCenterPos - Vec3{0, kPalmAy, 0};
    push_vertex(south, kPalmCenter, 0, 1.0, -1, 0.0, -1);
  }
  const int palm_count = static_cast<int>(verts.size());

  t.faces.clear();
  auto palm_idx = [&](int s, int l) { return 1 + (s - 1) * kPalmSlices + (l % kPalmSlices); };
  for (int l = 0; l < kPalmSlices; ++l)
    t.faces.push_back({0, palm_idx(1, l), palm_idx(1, l + 1)});
  for (int s = 1; s < kPalmStacks - 1; ++s)
    for (int l = 0; l < kPalmSlices; ++l) {
      t.faces.push_back({palm_idx(s, l), palm_idx(s + 1, l), palm_idx(s + 1, l + 1)});
      t.faces.push_back({palm_idx(s, l), palm_idx(s + 1, l + 1), palm_idx(s, l + 1)});
    }
  for (int l = 0; l < kPalmSlices; ++l)
    t.faces.push_back({palm_count - 1, palm_idx(kPalmStacks - 1, l + 1),
                       palm_idx(kPalmStacks - 1, l)});

  // ---- fingers: tapered tubes + tip vertex ----
  for (int f = 0; f < kFingers; ++f) {
    const FingerSpec& fs = fingers[f];
    const double total = fs.seg_len[0] + fs.seg_len[1] + fs.seg_len[2];
    const Vec3 dir = fs.dir;
    Vec3 u = dir.cross({0, 0, 1});
    if (u.norm() < 1e-9) u = {1, 0, 0};
    u = u.normalized();
    const Vec3 w = dir.cross(u).normalized();

    const int mcp = finger_joint(f, 0), pip = finger_joint(f, 1), dip = finger_joint(f, 2);
    const double l1 = fs.seg_len[0], l2 = fs.seg_len[1];
    auto skin_for = [&](double arc, int& j0, double& w0, int& j1, double& w1) {
      // blend across joint boundaries over a 6 mm band
      const double band = 0.006;
      auto ramp = [&](double x) { return std::clamp(0.5 + x / band, 0.0, 1.0); };
      if (arc < l1 - band / 2) {
        j0 = mcp; w0 = 1.0; j1 = -1; w1 = 0.0;
      } else if (arc < l1 + band / 2) {
        const double a = ramp(arc - l1);
        j0 = mcp; w0 = 1.0 - a; j1 = pip; w1 = a;
      } else if (arc < l1 + l2 - band / 2) {
        j0 = pip; w0 = 1.0; j1 = -1; w1 = 0.0;
      } else if (arc < l1 + l2 + band / 2) {
        const double a = ramp(arc - l1 - l2);
        j0 = pip; w0 = 1.0 - a; j1 = dip; w1 = a;
      } else {
        j0 = dip; w0 = 1.0; j1 = -1; w1 = 0.0;
      }
    };

    const int ring0 = static_cast<int>(verts.size());
    for (int k = 0; k < fs.rings; ++k) {
      const double tk = static_cast<double>(k) / (fs.rings - 1);
      const double arc = tk * 0.97 * total;
      const double r = fs.r_base + (fs.r_tip - fs.r_base) * tk;
      int j0, j1;
      double w0, w1;
      skin_for(arc, j0, w0, j1, w1);
      const int label = finger_segment_label(f, arc, fs);
      for (int j = 0; j < kRingVerts; ++j) {
        const double th = 2.0 * M_PI * j / kRingVerts;
        const Vec3 p = fs.base + dir * arc + (u * std::cos(th) + w * std::sin(th)) * r;
        push_vertex(p, label, j0, w0, j1, w1, f);
      }
    }
    const Vec3 tip_pos = fs.base + dir * (total + 0.6 * fs.r_tip);
    const int tip_label = finger_segment_label(f, total, fs);
    push_vertex(tip_pos, tip_label, dip, 1.0, -1, 0.0, f);
    const int tip_idx = static_cast<int>(verts.size()) - 1;

    for (int k = 0; k + 1 < fs.rings; ++k)
      for (int j = 0; j < kRingVerts; ++j) {
        const int a = ring0 + k * kRingVerts + j;
        const int b = ring0 + k * kRingVerts + (j + 1) % kRingVerts;
        const int c = ring0 + (k + 1) * kRingVerts + (j + 1) % kRingVerts;
        const int d = ring0 + (k + 1) * kRingVerts + j;
        t.faces.push_back({a, b, c});
        t.faces.push_back({a, c, d});
      }
    for (int j = 0; j < kRingVerts; ++j) {
      const int a = ring0 + (fs.rings - 1) * kRingVerts + j;
      const int b = ring0 + (fs.rings - 1) * kRingVerts + (j + 1) % kRingVerts;
      t.faces.push_back({a, b, tip_idx});
    }

    // stitch base ring to the nearest palm vertices so the mesh is one component
    std::array<int, kRingVerts> nearest{};
    for (int j = 0; j < kRingVerts; ++j) {
      const Vec3 p = verts[ring0 + j];
      double best = 1e30;
      for (int i = 0; i < palm_count; ++i) {
        const double d = (verts[i] - p).norm2();
        if (d < best) {
          best = d;
          nearest[j] = i;
        }
      }
    }
    for (int j = 0; j < kRingVerts; ++j) {
      const int a = ring0 + j, b = ring0 + (j + 1) % kRingVerts;
      t.faces.push_back({a, b, nearest[j]});
      if (nearest[(j + 1) % kRingVerts] != nearest[j])
        t.faces.push_back({b, nearest[(j + 1) % kRingVerts], nearest[j]});
    }
  }

  if (static_cast<int>(verts.size()) != HandTemplate::kVertices)
    throw std::logic_error("builtin hand: vertex count " + std::to_string(verts.size()));

  t.vertices = Tensor({HandTemplate::kVertices, 3});
  for (int i = 0; i < HandTemplate::kVertices; ++i) {
    t.vertices.at(i, 0) = verts[i].x;
    t.vertices.at(i, 1) = verts[i].y;
    t.vertices.at(i, 2) = verts[i].z;
  }
  t.joint_count = kHandJoints;

  // ---- rig skeleton ----
  rig.parent[0] = -1;
  rig.rest_position[0] = {0, -0.005, 0};
  rig.curl_axis[0] = {1, 0, 0};
  rig.curl_limit[0] = 0.0;
  for (int f = 0; f < kFingers; ++f) {
    const FingerSpec& fs = fingers[f];
    Vec3 axis = fs.dir.cross({0, 0, 1});
    if (axis.norm() < 1e-9) axis = {1, 0, 0};
    axis = axis.normalized();  // positive curl closes toward the palm side (+z)
    const int mcp = finger_joint(f, 0), pip = finger_joint(f, 1), dip = finger_joint(f, 2);
    rig.parent[mcp] = 0;
    rig.parent[pip] = mcp;
    rig.parent[dip] = pip;
    rig.rest_position[mcp] = fs.base;
    rig.rest_position[pip] = fs.base + fs.dir * fs.seg_len[0];
    rig.rest_position[dip] = fs.base + fs.dir * (fs.seg_len[0] + fs.seg_len[1]);
    rig.curl_axis[mcp] = axis;
    rig.curl_axis[pip] = axis;
    rig.curl_axis[dip] = axis;
    const double lim = f == 0 ? 1.2 : 1.6;
    rig.curl_limit[mcp] = lim;
    rig.curl_limit[pip] = lim + 0.2;
    rig.curl_limit[dip] = 1.0;
  }

  build_part_centers(t);
  build_adjacency(t);
  build_sampling(t);
  validate_template(t);
  return out;
}

const BuiltinHand& builtin_hand() {
  static const BuiltinHand h = build_builtin();
  return h;
}

}  // namespace

const HandTemplate& builtin_template() { return builtin_hand().tmpl; }
const HandRig& builtin_rig() { return builtin_hand().rig; }

TriMesh HandTemplate::mesh() const {
  TriMesh m;
  m.vertices.reserve(kVertices);
  for (int i = 0; i < kVertices; ++i)
    m.vertices.push_back({vertices.at(i, 0), vertices.at(i, 1), vertices.at(i, 2)});
  m.faces = faces;
  return m;
}

HandTemplate load_template_file(const std::string& obj_path, const std::string& labels_path) {
  TriMesh m = load_obj(obj_path);
  if (static_cast<int>(m.vertices.size()) != HandTemplate::kVertices)
    throw DimensionError("template file: expected 778 vertices, got " +
                         std::to_string(m.vertices.size()));
  std::ifstream lf(labels_path);
  if (!lf) throw std::runtime_error("template labels: cannot open " + labels_path);
  HandTemplate t;
  std::string line;
  while (std::getline(lf, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    int l;
    if (!(ss >> l)) throw std::runtime_error("template labels: malformed part label line");
    t.part_labels.push_back(l);
  }
  if (static_cast<int>(t.part_labels.size()) != HandTemplate::kVertices)
    throw DimensionError("template labels: expected 778 labels, got " +
                         std::to_string(t.part_labels.size()));
  t.vertices = Tensor({HandTemplate::kVertices, 3});
  for (int i = 0; i < HandTemplate::kVertices; ++i) {
    t.vertices.at(i, 0) = m.vertices[i].x;
    t.vertices.at(i, 1) = m.vertices[i].y;
    t.vertices.at(i, 2) = m.vertices[i].z;
  }
  t.faces = m.faces;
  t.joint_count = kHandJoints;
  build_part_centers(t);
  build_adjacency(t);
  build_sampling(t);
  validate_template(t);
  return t;
}

void export_template(const HandTemplate& t, const std::string& obj_path,
                     const std::string& labels_path) {
  save_obj(t.mesh(), obj_path);
  std::ofstream lf(labels_path);
  if (!lf) throw std::runtime_error("export_template: cannot open " + labels_path);
  for (int l : t.part_labels) lf << l << "\n";
}

GraphSpec build_part_graph(const HandTemplate& t) {
  return {HandTemplate::kParts, t.part_adjacency, t.part_centers};
}

GraphSpec build_vertex_graph(const HandTemplate& t) {
  return {HandTemplate::kVertices, t.vertex_adjacency, t.vertices};
}

GraphSpec build_submesh_graph(const HandTemplate& t) {
  Tensor pos({HandTemplate::kSubVertices, 3});
  for (int i = 0; i < HandTemplate::kSubVertices; ++i)
    for (int k = 0; k < 3; ++k) pos.at(i, k) = t.vertices.at(t.sub_indices[i], k);
  return {HandTemplate::kSubVertices, t.sub_adjacency, pos};
}

Tensor downsample_field(const HandTemplate& t, const Tensor& field) {
  if (field.rank() != 2 || field.rows() != HandTemplate::kVertices)
    throw DimensionError("downsample_field: expected [778,k], got " + field.shape_str());
  const int k = field.cols();
  Tensor out({HandTemplate::kSubVertices, k});
  kern::gemm(false, false, HandTemplate::kSubVertices, k, HandTemplate::kVertices,
             t.downsample_matrix.v.data(), field.v.data(), out.v.data());
  return out;
}

Tensor upsample_field(const HandTemplate& t, const Tensor& field) {
  if (field.rank() != 2 || field.rows() != HandTemplate::kSubVertices)
    throw DimensionError("upsample_field: expected [195,k], got " + field.shape_str());
  const int k = field.cols();
  Tensor out({HandTemplate::kVertices, k});
  kern::gemm(false, false, HandTemplate::kVertices, k, HandTemplate::kSubVertices,
             t.upsample_matrix.v.data(), field.v.data(), out.v.data());
  return out;
}

}  // namespace crec
