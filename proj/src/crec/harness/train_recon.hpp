#pragma once

#include <iosfwd>
#include <optional>

#include "crec/harness/train_contact.hpp"
#include "crec/recon/decoder.hpp"
#include "crec/recon/initial.hpp"
#include "crec/recon/marching_cubes.hpp"

namespace crec {

// Stage-two model bundle: initial-feature module, contact-volume filters and
// SDF decoder share one parameter store.
struct ReconModel {
  ExperimentConfig cfg;
  nn::ParamStore ps;
  InitialModule initial;
  FieldParams field;
  SdfDecoder decoder;

  explicit ReconModel(const ExperimentConfig& cfg);
};

ReconModel load_recon_model(const std::string& checkpoint_path);

// Frozen per-scene conditioning: the contact probabilities (from the selected
// source) and the stage-two hand pose in normalized coordinates.
struct SceneConditioning {
  Tensor c_vertex;    // [778]
  HandPose pose;      // pose fed to stage two
  Tensor hand_norm;   // [778,3] posed hand, normalized wrist frame
};

// contact may be null only when cfg.recon.contact_source is ground_truth/none.
SceneConditioning condition_scene(const ExperimentConfig& cfg, const StoredScene& scene,
                                  const ContactModel* contact);

// Anchor, voxelize and diffuse the conditioning into the feature pyramid.
// Returns nullopt for the unconditioned (contact_source = none) ablation.
std::optional<ContactVolumePyramid> build_scene_pyramid(ReconModel& model,
                                                        const SceneConditioning& cond);

// Query the pyramid (zeros when absent) and decode SDF values at normalized
// points [m,3] -> [m,1].
ad::Var decode_at_points(ReconModel& model, const std::optional<ContactVolumePyramid>& pyramid,
                         const ad::Var& f0, const Tensor& points);

// Uniform grid decode over [-1,1]^3, marching cubes, then denormalization into
// world meters.
MeshResult reconstruct_object(ReconModel& model, const StoredScene& scene,
                              const SceneConditioning& cond, int grid_res);

struct ReconEpochLog {
  int epoch = 0;
  double loss = 0, loss_obj = 0, loss_hoi = 0;
  double eval_chamfer_mm = 0;  // mean over the held-out subset; NaN if all failed
};

struct TrainReconResult {
  std::vector<ReconEpochLog> epochs;
  int best_epoch = -1;
  double best_chamfer_mm = 0;
  std::string best_checkpoint;
  std::string last_checkpoint;
};

// Optimizes the reconstruction loss with the contact estimator frozen.
// contact_checkpoint may be empty for ground_truth/none contact sources.
TrainReconResult train_recon(const ExperimentConfig& cfg, const std::string& contact_checkpoint,
                             std::ostream& log);

}  // namespace crec
