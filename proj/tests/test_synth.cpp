#include "doctest.h"

#include <cmath>

#include "crec/synth/scene.hpp"

using namespace crec;

TEST_CASE("sphere sdf at center and surface") {
  PrimitiveObject obj;
  obj.kind = PrimitiveObject::Kind::Sphere;
  obj.dims = {0.05, 0.05, 0.05};
  CHECK(object_sdf(obj, {0, 0, 0}) == doctest::Approx(-0.05).epsilon(1e-12));
  CHECK(object_sdf(obj, {0.05, 0, 0}) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("box sdf matches a dense-surface-sampling oracle") {
  PrimitiveObject obj;
  obj.kind = PrimitiveObject::Kind::Box;
  obj.dims = {0.02, 0.03, 0.04};  // a 0.04 x 0.06 x 0.08 m box
  obj.pose.rot = Mat3::axis_angle({0.3, -0.2, 0.5});
  obj.pose.t = {0.01, -0.02, 0.03};
  obj.validate();
  const TriMesh dense = tessellate(obj, 96);
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 p{rng.uniform(-0.06, 0.08), rng.uniform(-0.08, 0.06), rng.uniform(-0.04, 0.1)};
    const double s = object_sdf(obj, p);
    const double d = point_mesh_distance(p, dense);
    CHECK(std::fabs(std::fabs(s) - d) < 1e-4);
  }
}

TEST_CASE("every primitive kind is negative inside and positive far outside") {
  for (PrimitiveObject::Kind k :
       {PrimitiveObject::Kind::Sphere, PrimitiveObject::Kind::Box,
        PrimitiveObject::Kind::Cylinder, PrimitiveObject::Kind::Capsule}) {
    PrimitiveObject obj;
    obj.kind = k;
    obj.dims = {0.04, 0.05, 0.06};
    obj.validate();
    CHECK(object_sdf(obj, obj.pose.t) < 0.0);
    CHECK(object_sdf(obj, {1.0, 1.0, 1.0}) > 0.0);
  }
}

TEST_CASE("union sdf is the min over children") {
  PrimitiveObject a;
  a.kind = PrimitiveObject::Kind::Sphere;
  a.dims = {0.03, 0.03, 0.03};
  PrimitiveObject b = a;
  b.pose.t = {0.08, 0, 0};
  PrimitiveObject u;
  u.kind = PrimitiveObject::Kind::Union;
  u.children = {a, b};
  u.validate();
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    const Vec3 p{rng.uniform(-0.1, 0.2), rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1)};
    CHECK(object_sdf(u, p) ==
          doctest::Approx(std::min(object_sdf(a, p), object_sdf(b, p))).epsilon(1e-12));
  }
}

TEST_CASE("generate_scene is deterministic in the seed") {
  const GraspScene a = generate_scene(42), b = generate_scene(42);
  CHECK(a.hand_vertices_posed.v == b.hand_vertices_posed.v);
  CHECK(a.gt_vertex_contact == b.gt_vertex_contact);
  CHECK(a.wrist_frame.scale == b.wrist_frame.scale);
  CHECK(a.object.dims.x == b.object.dims.x);
  CHECK((a.object.pose.t - b.object.pose.t).norm() == 0.0);
  const GraspScene c = generate_scene(43);
  CHECK(a.hand_vertices_posed.v != c.hand_vertices_posed.v);
}

TEST_CASE("accepted scenes touch the object and have enough contacts") {
  int accepted = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    GraspScene s;
    try {
      s = generate_scene(seed);
    } catch (const GenerationError&) {
      continue;
    }
    ++accepted;
    double min_sdf = 1e9;
    int n_contacts = 0;
    for (int i = 0; i < 778; ++i) {
      min_sdf = std::min(min_sdf, object_sdf(s.object, {s.hand_vertices_posed.at(i, 0),
                                                        s.hand_vertices_posed.at(i, 1),
                                                        s.hand_vertices_posed.at(i, 2)}));
      n_contacts += s.gt_vertex_contact[i];
    }
    CHECK(min_sdf <= 0.005 + 1e-12);
    CHECK(n_contacts >= 5);
  }
  CHECK(accepted >= 95);
}

TEST_CASE("part contacts are the OR of vertex contacts") {
  const HandTemplate& t = builtin_template();
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const GraspScene s = generate_scene(seed);
    std::vector<bool> expect(18, false);
    for (int i = 0; i < 778; ++i)
      if (s.gt_vertex_contact[i]) expect[t.part_labels[i]] = true;
    CHECK(s.gt_part_contact == expect);
  }
}

TEST_CASE("label_contacts matches mesh-distance thresholding") {
  const GraspScene s = generate_scene(7);
  const TriMesh dense = s.object_mesh(64);
  int disagreements = 0;
  for (int i = 0; i < 778; ++i) {
    const Vec3 p{s.hand_vertices_posed.at(i, 0), s.hand_vertices_posed.at(i, 1),
                 s.hand_vertices_posed.at(i, 2)};
    const double sdf = object_sdf(s.object, p);
    const double mesh_d = point_mesh_distance(p, dense) * (sdf < 0 ? -1.0 : 1.0);
    // skip vertices within tessellation error of the threshold
    if (std::fabs(mesh_d - 0.005) < 5e-4) continue;
    if ((mesh_d <= 0.005) != s.gt_vertex_contact[i]) ++disagreements;
  }
  CHECK(disagreements == 0);
}

TEST_CASE("labels are boundary inclusive and all-false far away") {
  PrimitiveObject obj;
  obj.kind = PrimitiveObject::Kind::Sphere;
  obj.dims = {0.05, 0.05, 0.05};
  obj.pose.t = {10, 0, 0};  // 10 m away
  Tensor verts = builtin_template().vertices;
  std::vector<bool> vc, pc;
  label_contacts(obj, verts, 0.005, vc, pc);
  for (bool b : vc) CHECK(!b);
  for (bool b : pc) CHECK(!b);

  // move the object so one vertex sits exactly on the surface
  obj.pose.t = {verts.at(0, 0) + 0.05, verts.at(0, 1), verts.at(0, 2)};
  label_contacts(obj, verts, 0.0, vc, pc);
  CHECK(vc[0]);
}

TEST_CASE("rendered image has the contracted channel semantics") {
  const GraspScene s = generate_scene(3);
  const RenderedImage img = render(s);
  require_shape(img.channels, {3, 224, 224}, "image");
  int hand_px = 0, obj_px = 0;
  const int hw = 224 * 224;
  for (int y = 0; y < 224; ++y)
    for (int x = 0; x < 224; ++x) {
      const int p = y * 224 + x;
      const double h = img.channels.v[p], o = img.channels.v[hw + p],
                   d = img.channels.v[2 * hw + p];
      CHECK((h == 0.0 || h == 1.0));
      CHECK((o == 0.0 || o == 1.0));
      CHECK(d >= 0.0);
      CHECK(d <= 1.0);
      if (h == 0.0 && o == 0.0) CHECK(d == 0.0);
      hand_px += h == 1.0;
      obj_px += o == 1.0;
    }
  CHECK(hand_px > 0);
  CHECK(obj_px > 0);
}

TEST_CASE("sphere silhouette area matches the analytic projection") {
  GraspScene s;
  s.object.kind = PrimitiveObject::Kind::Sphere;
  s.object.dims = {0.04, 0.04, 0.04};
  s.object.pose.t = {0, 0, 0};
  s.hand_vertices_posed = builtin_template().vertices;
  // push the hand far behind the sphere but inside the depth range
  for (int i = 0; i < 778; ++i) s.hand_vertices_posed.at(i, 2) += 10.0;
  Camera cam;
  cam.fx = cam.fy = 300;
  cam.cx = cam.cy = 112;
  cam.world_to_cam = RigidTransform::identity();
  cam.world_to_cam.t = {0, 0, 0.45};
  s.camera = cam;
  const RenderedImage img = render(s);
  int obj_px = 0;
  for (int p = 0; p < 224 * 224; ++p) obj_px += img.channels.v[224 * 224 + p] == 1.0;
  // projected radius in pixels ~ f*r/sqrt(d^2-r^2)
  const double d = 0.45, r = 0.04;
  const double rp = 300.0 * r / std::sqrt(d * d - r * r);
  const double analytic = M_PI * rp * rp;
  CHECK(std::fabs(obj_px - analytic) / analytic < 0.03);
}

TEST_CASE("sdf samples agree with the analytic oracle after denormalization") {
  const GraspScene s = generate_scene(12);
  Rng rng(99);
  const std::vector<SdfSample> samples = sample_sdf_points(s, 500, 0.95, rng);
  CHECK(static_cast<int>(samples.size()) == 500);
  for (const SdfSample& smp : samples) {
    CHECK(std::fabs(smp.x.x) <= 1.0 + 1e-12);
    CHECK(std::fabs(smp.x.y) <= 1.0 + 1e-12);
    CHECK(std::fabs(smp.x.z) <= 1.0 + 1e-12);
    const Vec3 world = s.wrist_frame.denormalize(smp.x);
    const double expect = object_sdf(s.object, world) * s.wrist_frame.scale;
    CHECK(std::fabs(smp.s_gt - expect) < 1e-9);
  }
}

TEST_CASE("near_fraction=0 gives uniform cube samples") {
  const GraspScene s = generate_scene(12);
  Rng rng(5);
  const std::vector<SdfSample> samples = sample_sdf_points(s, 200, 0.0, rng);
  // uniform samples should spread over the cube, not cluster at the surface
  int near_surface = 0;
  for (const SdfSample& smp : samples) near_surface += std::fabs(smp.s_gt) < 0.02;
  CHECK(near_surface < 60);
}

TEST_CASE("wrist frame round trip and hand containment") {
  for (std::uint64_t seed = 200; seed < 300; ++seed) {
    const GraspScene s = generate_scene(seed);
    const Vec3 p{0.03, -0.05, 0.11};
    const Vec3 rt = s.wrist_frame.denormalize(s.wrist_frame.normalize(p));
    CHECK((rt - p).norm() < 1e-9);
    for (int i = 0; i < 778; ++i) {
      const Vec3 n = s.wrist_frame.normalize({s.hand_vertices_posed.at(i, 0),
                                              s.hand_vertices_posed.at(i, 1),
                                              s.hand_vertices_posed.at(i, 2)});
      CHECK(std::fabs(n.x) <= 0.5);
      CHECK(std::fabs(n.y) <= 0.5);
      CHECK(std::fabs(n.z) <= 0.5);
    }
  }
}

TEST_CASE("contact frequencies over 1000 scenes are nondegenerate") {
  std::vector<int> freq(18, 0);
  int n = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    GraspScene s;
    try {
      s = generate_scene(seed);
    } catch (const GenerationError&) {
      continue;
    }
    ++n;
    for (int p = 0; p < 18; ++p) freq[p] += s.gt_part_contact[p];
  }
  CHECK(n >= 950);
  for (int p = 0; p < 18; ++p) {
    CHECK(freq[p] > 0);
    CHECK(freq[p] < n);
  }
}

TEST_CASE("style names round trip") {
  for (GraspStyle st :
       {GraspStyle::Power, GraspStyle::Pinch, GraspStyle::Tripod, GraspStyle::Lateral})
    CHECK(style_from_name(style_name(st)) == st);
  CHECK_THROWS(style_from_name("fist"));
}
