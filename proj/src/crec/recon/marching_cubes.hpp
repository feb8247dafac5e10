#pragma once

#include <functional>

#include "crec/geom/mesh.hpp"

namespace crec {

struct MeshResult {
  TriMesh mesh;
  bool empty = false;  // no sign change anywhere in the grid
};

// Iso-surface at level 0 of a scalar field sampled on a regular grid of
// `resolution` cells per axis over [lo, hi], with linear edge interpolation.
// Shared edge vertices are welded, so closed surfaces come out watertight.
MeshResult extract_mesh(const std::function<double(const Vec3&)>& sdf, int resolution,
                        const Vec3& lo = {-1, -1, -1}, const Vec3& hi = {1, 1, 1});

// Variant taking the pre-sampled grid, values[(i*(n+1)+j)*(n+1)+k].
MeshResult extract_mesh_grid(const std::vector<double>& values, int resolution, const Vec3& lo,
                             const Vec3& hi);

}  // namespace crec
