#include "doctest.h"

#include <cmath>

#include "crec/metrics/metrics.hpp"
#include "crec/synth/primitives.hpp"

using namespace crec;

namespace {

TriMesh sphere_mesh(double r, const Vec3& center, int res = 48) {
  PrimitiveObject obj;
  obj.kind = PrimitiveObject::Kind::Sphere;
  obj.dims = {r, r, r};
  obj.pose.t = center;
  return tessellate(obj, res);
}

}  // namespace

TEST_CASE("contact precision/recall/F1 on hand-checkable cases") {
  const std::vector<bool> gt{true, true, false, false};
  const ContactMetrics perfect = contact_prf(gt, gt);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);

  // one hit, one miss, one false alarm
  const ContactMetrics mixed = contact_prf({true, false, true, false}, gt);
  CHECK(mixed.precision == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mixed.recall == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mixed.f1 == doctest::Approx(0.5).epsilon(1e-12));

  // empty denominators collapse to zero instead of dividing by zero
  const ContactMetrics none = contact_prf({false, false}, {false, false});
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);

  CHECK_THROWS_AS(contact_prf({true}, gt), DimensionError);
}

TEST_CASE("chamfer of two points 1 mm apart is exactly 1.0 mm") {
  const std::vector<Vec3> p{{0, 0, 0}}, q{{0.001, 0, 0}};
  CHECK(chamfer_points(p, q) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(chamfer_points(q, p) == doctest::Approx(1.0).epsilon(1e-12));
  // squared variant reports mm^2
  CHECK(chamfer_points(p, q, true) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(chamfer_points(p, p) == 0.0);
  CHECK_THROWS_AS(chamfer_points({}, q), MetricError);
}

TEST_CASE("mesh chamfer is symmetric and matches a dense brute-force oracle") {
  const double r = 0.03, d = 0.01;
  const TriMesh a = sphere_mesh(r, {0, 0, 0}, 64);
  const TriMesh b = sphere_mesh(r, {d, 0, 0}, 64);
  const double cd = chamfer_distance(a, b, 20000);
  CHECK(cd == doctest::Approx(chamfer_distance(b, a, 20000)).epsilon(1e-12));
  CHECK(cd > 0.0);

  // oracle: 10^6 random surface points against the exact analytic distance
  // to the other sphere, |  |p - c| - r  |, identical in both directions
  Rng rng(7);
  double acc = 0;
  const int n_dense = 1000000;
  for (int i = 0; i < n_dense; ++i) {
    Vec3 p{rng.normal(), rng.normal(), rng.normal()};
    p = p * (r / p.norm());
    acc += std::fabs((p - Vec3{d, 0, 0}).norm() - r);
  }
  const double oracle = acc / n_dense * 1e3;
  CHECK(std::fabs(cd - oracle) / oracle < 0.10);
}

TEST_CASE("F-score of a sphere against its 4 mm dilation lands on the threshold steps") {
  const TriMesh a = sphere_mesh(0.03, {0, 0, 0}, 64);
  const TriMesh b = sphere_mesh(0.034, {0, 0, 0}, 64);
  CHECK(f_score(a, b, 5.0) == doctest::Approx(1.0).epsilon(0.02));
  CHECK(f_score(a, b, 10.0) == doctest::Approx(1.0).epsilon(0.02));
  CHECK(f_score(a, b, 3.0) < 0.02);
}

TEST_CASE("F-score is monotone in the threshold") {
  const TriMesh a = sphere_mesh(0.03, {0, 0, 0});
  const TriMesh b = sphere_mesh(0.032, {0.003, 0, 0});
  double prev = -1;
  for (double tau : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    const double f = f_score(a, b, tau);
    CHECK(f >= prev);
    prev = f;
  }
  CHECK(prev == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("penetration depth: 7 mm inside reads 0.7 cm, mesh and sdf agree") {
  const auto sdf = [](const Vec3& p) { return p.norm() - 0.05; };
  Tensor verts({2, 3});
  verts.at(0, 0) = 0.043;  // 7 mm below the surface
  verts.at(1, 0) = 0.2;    // far outside
  CHECK(penetration_depth_cm(verts, sdf) == doctest::Approx(0.7).epsilon(1e-9));

  const TriMesh mesh = sphere_mesh(0.05, {0, 0, 0}, 64);
  CHECK(std::fabs(penetration_depth_cm(verts, mesh) - 0.7) < 0.05);

  // no vertex inside -> exactly zero
  Tensor outside({1, 3});
  outside.at(0, 0) = 0.2;
  CHECK(penetration_depth_cm(outside, sdf) == 0.0);
}

TEST_CASE("penetration depth is invariant under a rigid motion of the whole scene") {
  const Vec3 shift{0.13, -0.07, 0.22};
  const auto sdf = [](const Vec3& p) { return p.norm() - 0.05; };
  const auto sdf_shifted = [&](const Vec3& p) { return (p - shift).norm() - 0.05; };
  Rng rng(3);
  Tensor verts({20, 3}), moved({20, 3});
  for (int i = 0; i < 20; ++i)
    for (int k = 0; k < 3; ++k) {
      verts.at(i, k) = rng.uniform(-0.06, 0.06);
      moved.at(i, k) = verts.at(i, k) + (k == 0 ? shift.x : k == 1 ? shift.y : shift.z);
    }
  CHECK(penetration_depth_cm(verts, sdf) ==
        doctest::Approx(penetration_depth_cm(moved, sdf_shifted)).epsilon(1e-9));
}

TEST_CASE("intersection volume of two 3 cm spheres 4 cm apart matches the lens formula") {
  const double r = 0.03, d = 0.04;
  const TriMesh a = sphere_mesh(r, {0, 0, 0}, 64);
  const TriMesh b = sphere_mesh(r, {d, 0, 0}, 64);
  // equal-sphere lens: V = pi (4r + d)(2r - d)^2 / 12, in cm^3
  const double lens = M_PI * (4 * r + d) * (2 * r - d) * (2 * r - d) / 12.0 * 1e6;
  const double est = intersection_volume_cm3(a, b);
  CHECK(std::fabs(est - lens) / lens < 0.02);

  // the sdf-pair overload agrees without needing closed meshes
  const auto sa = [&](const Vec3& p) { return p.norm() - r; };
  const auto sb = [&](const Vec3& p) { return (p - Vec3{d, 0, 0}).norm() - r; };
  const double est_sdf =
      intersection_volume_cm3(sa, sb, {d - r, -r, -r}, {r, r, r});
  CHECK(std::fabs(est_sdf - lens) / lens < 0.02);
}

TEST_CASE("halving the voxel size moves the volume estimate by less than 5%") {
  const double r = 0.03, d = 0.04;
  const auto sa = [&](const Vec3& p) { return p.norm() - r; };
  const auto sb = [&](const Vec3& p) { return (p - Vec3{d, 0, 0}).norm() - r; };
  const Vec3 lo{d - r, -r, -r}, hi{r, r, r};
  const double coarse = intersection_volume_cm3(sa, sb, lo, hi, 0.002);
  const double fine = intersection_volume_cm3(sa, sb, lo, hi, 0.001);
  CHECK(std::fabs(coarse - fine) / fine < 0.05);
}

TEST_CASE("disjoint shapes have zero intersection volume") {
  const auto sa = [](const Vec3& p) { return p.norm() - 0.01; };
  const auto sb = [](const Vec3& p) { return (p - Vec3{0.1, 0, 0}).norm() - 0.01; };
  CHECK(intersection_volume_cm3(sa, sb, {0.05, -0.01, -0.01}, {0.06, 0.01, 0.01}) == 0.0);
  // inverted box -> empty domain -> 0
  CHECK(intersection_volume_cm3(sa, sb, {0.1, 0, 0}, {0.0, 0, 0}) == 0.0);
}

TEST_CASE("mesh intersection volume refuses open meshes") {
  TriMesh open;
  open.vertices = {{0, 0, 0}, {0.1, 0, 0}, {0, 0.1, 0}};
  open.faces = {{0, 1, 2}};
  const TriMesh closed = sphere_mesh(0.03, {0, 0, 0});
  CHECK_THROWS_AS(intersection_volume_cm3(open, closed), MetricError);
  CHECK_THROWS_AS(intersection_volume_cm3(closed, TriMesh{}), MetricError);
}
