#pragma once

#include <array>
#include <string>
#include <vector>

#include "crec/core/rng.hpp"
#include "crec/geom/vec3.hpp"

namespace crec {

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;

  double area() const;
  void bounds(Vec3& lo, Vec3& hi) const;
  bool empty() const { return faces.empty(); }
};

// Area-weighted uniform surface samples.
std::vector<Vec3> sample_surface(const TriMesh& mesh, int n, Rng& rng);

// Unsigned distance from a point to the mesh surface (exact point-triangle).
double point_mesh_distance(const Vec3& p, const TriMesh& mesh);

// Generalized winding number; |w| > 0.5 means inside for a closed mesh.
double winding_number(const Vec3& p, const TriMesh& mesh);

// Every edge shared by exactly two triangles.
bool is_watertight(const TriMesh& mesh);

void save_obj(const TriMesh& mesh, const std::string& path);
TriMesh load_obj(const std::string& path);
void save_ply(const TriMesh& mesh, const std::string& path);

}  // namespace crec
