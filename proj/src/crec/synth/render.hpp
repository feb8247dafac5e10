#pragma once

#include "crec/core/tensor.hpp"
#include "crec/geom/mesh.hpp"
#include "crec/geom/vec3.hpp"

namespace crec {

constexpr int kImageSize = 224;

struct Camera {
  double fx = 260, fy = 260, cx = kImageSize / 2.0, cy = kImageSize / 2.0;
  RigidTransform world_to_cam = RigidTransform::identity();
  double z_near = 0.10, z_far = 1.20;
};

// Channels: 0 hand silhouette, 1 object silhouette, 2 normalized inverse depth.
struct RenderedImage {
  Tensor channels{std::vector<int>{3, kImageSize, kImageSize}};
};

struct RenderError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Depth-buffered rasterization of the two meshes.
RenderedImage render_scene(const TriMesh& hand, const TriMesh& object, const Camera& cam);

}  // namespace crec
