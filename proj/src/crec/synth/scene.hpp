#pragma once

#include <vector>

#include "crec/core/rng.hpp"
#include "crec/core/tensor.hpp"
#include "crec/hand/hand_rig.hpp"
#include "crec/hand/hand_template.hpp"
#include "crec/synth/primitives.hpp"
#include "crec/synth/render.hpp"

namespace crec {

// Hand-centric rigid+uniform-scale frame; the hand fits in [-0.5,0.5]^3.
struct WristFrame {
  RigidTransform world_to_wrist = RigidTransform::identity();
  double scale = 1.0;

  Vec3 normalize(const Vec3& x_world) const { return world_to_wrist.apply(x_world) * scale; }
  Vec3 denormalize(const Vec3& x_norm) const {
    return world_to_wrist.inverse().apply(x_norm / scale);
  }
};

enum class GraspStyle { Power, Pinch, Tripod, Lateral };

struct GraspScene {
  PrimitiveObject object;
  HandPose hand_pose;
  Tensor hand_vertices_posed;  // [778,3] world, meters
  Camera camera;
  WristFrame wrist_frame;
  std::vector<bool> gt_vertex_contact;  // 778
  std::vector<bool> gt_part_contact;    // 18
  GraspStyle style = GraspStyle::Power;
  std::uint64_t rng_seed = 0;

  TriMesh hand_mesh() const;
  TriMesh object_mesh(int resolution = 24) const;
};

struct SdfSample {
  Vec3 x;       // normalized wrist frame
  double s_gt;  // normalized units, negative inside
};

struct GeneratorConfig {
  // sampling mix over object kinds (sphere, box, cylinder, capsule, union)
  std::vector<double> kind_weights{1, 1, 1, 1, 0.5};
  // sampling mix over grasp styles (power, pinch, tripod, lateral)
  std::vector<double> style_weights{1, 1, 1, 1};
  double contact_delta = 0.005;   // m, both the GT label and the scene filter threshold
  double near_sigma = 0.005;      // m, near-surface jitter before normalization
  int min_contact_vertices = 5;
  int max_close_attempts = 4;
};

struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic in seed. Throws GenerationError when no valid grasp is found.
GraspScene generate_scene(std::uint64_t seed, const GeneratorConfig& config = {});

// Vertex i contacts iff object_sdf(vertex) <= delta; parts are the OR of their vertices.
void label_contacts(const PrimitiveObject& obj, const Tensor& hand_vertices, double delta,
                    std::vector<bool>& vertex_contact, std::vector<bool>& part_contact);

RenderedImage render(const GraspScene& scene);

std::vector<SdfSample> sample_sdf_points(const GraspScene& scene, int n, double near_fraction,
                                         Rng& rng, double near_sigma_m = 0.005);

const char* style_name(GraspStyle s);
GraspStyle style_from_name(const std::string& s);

}  // namespace crec
