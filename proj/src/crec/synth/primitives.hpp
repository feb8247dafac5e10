#pragma once

#include <string>
#include <vector>

#include "crec/geom/mesh.hpp"
#include "crec/geom/vec3.hpp"

namespace crec {

// Analytic grasp-target shape. dims meaning per kind:
//   Sphere: {r,-,-}  Box: half-extents {hx,hy,hz}  Cylinder: {r, half_h, -}
//   Capsule: {r, half_h, -}  Union: two children, dims unused
struct PrimitiveObject {
  enum class Kind { Sphere, Box, Cylinder, Capsule, Union };

  Kind kind = Kind::Sphere;
  Vec3 dims{0.03, 0.03, 0.03};
  RigidTransform pose = RigidTransform::identity();
  std::vector<PrimitiveObject> children;  // exactly 2 when kind == Union

  void validate() const;
  // conservative bounding-sphere radius about the pose origin
  double bounding_radius() const;
};

// Exact signed distance in meters (union = min of children).
double object_sdf(const PrimitiveObject& obj, const Vec3& x);

// Watertight triangulation for rendering and mesh-based metrics.
TriMesh tessellate(const PrimitiveObject& obj, int resolution = 24);

std::string kind_name(PrimitiveObject::Kind k);
PrimitiveObject::Kind kind_from_name(const std::string& s);

}  // namespace crec
