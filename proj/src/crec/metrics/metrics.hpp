#pragma once

#include <functional>

#include "crec/core/tensor.hpp"
#include "crec/geom/mesh.hpp"

namespace crec {

struct MetricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ContactMetrics {
  double precision = 0, recall = 0, f1 = 0;
};

struct ReconMetrics {
  double chamfer_mm = 0;
  double f_at_5mm = 0;
  double f_at_10mm = 0;
  double penetration_depth_cm = 0;
  double intersection_volume_cm3 = 0;
};

// Fixed seed so metric reports are reproducible bit-for-bit.
constexpr std::uint64_t kMetricSeed = 0xC0FFEE;

// P = TP/(TP+FP), R = TP/(TP+FN), F1 harmonic mean; empty denominators -> 0.
ContactMetrics contact_prf(const std::vector<bool>& pred, const std::vector<bool>& gt);

// Symmetric mean nearest-neighbor distance between point sets, in mm
// (inputs in meters). squared=true uses squared distances.
double chamfer_points(const std::vector<Vec3>& p, const std::vector<Vec3>& q,
                      bool squared = false);
// Surface-sampled variant; each mesh sampled with the same fixed seed.
double chamfer_distance(const TriMesh& a, const TriMesh& b, int n_samples = 10000,
                        std::uint64_t seed = kMetricSeed, bool squared = false);

// Harmonic mean of the fractions of samples within tau_mm of the other mesh.
double f_score(const TriMesh& a, const TriMesh& b, double tau_mm, int n_samples = 10000,
               std::uint64_t seed = kMetricSeed);

// max over vertices of max(0, -sdf), in cm (inputs in meters).
double penetration_depth_cm(const Tensor& hand_vertices,
                            const std::function<double(const Vec3&)>& object_sdf);
// Mesh-only object: sign from the generalized winding number.
double penetration_depth_cm(const Tensor& hand_vertices, const TriMesh& object);

// Voxelized overlap volume in cm^3; both meshes must be closed.
double intersection_volume_cm3(const TriMesh& a, const TriMesh& b, double voxel_size = 0.002);

// Same estimator over two signed distance (or inside-negative) fields,
// restricted to the given box. Works when one shape has no closed mesh.
double intersection_volume_cm3(const std::function<double(const Vec3&)>& sdf_a,
                               const std::function<double(const Vec3&)>& sdf_b, const Vec3& lo,
                               const Vec3& hi, double voxel_size = 0.002);

}  // namespace crec
