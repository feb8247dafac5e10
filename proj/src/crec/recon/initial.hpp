#pragma once

#include "crec/contact/backbone.hpp"
#include "crec/hand/hand_rig.hpp"
#include "crec/synth/scene.hpp"

namespace crec {

// Initial-prediction surrogate: a trainable CNN visual embedding plus a linear
// articulation embedding, concatenated into f0 (default 256 + 48 = 304).
struct InitialConfig {
  BackboneConfig visual;   // visual.feature_dim = visual embedding size
  int articulation_dim = 48;

  InitialConfig() { visual.feature_dim = 256; }
  int f0_dim() const { return visual.feature_dim + articulation_dim; }
};

struct InitialPrediction {
  Camera camera;
  Tensor hand_mesh;  // [778,3] normalized wrist frame
  ad::Var f0;        // [1, f0_dim]
};

struct InitialModule {
  InitialConfig cfg;
  Backbone visual;
  nn::Linear articulation;  // 48 -> articulation_dim

  InitialModule() = default;
  InitialModule(nn::ParamStore& ps, const InitialConfig& cfg, Rng& rng);

  ad::Var features(nn::ParamStore& ps, const Tensor& image, const HandPose& pose) const;
  InitialPrediction predict(nn::ParamStore& ps, const GraspScene& scene, const Tensor& image,
                            const HandPose& pose) const;
};

// The hand pose fed into stage two: exact ground truth, or ground truth
// corrupted by seeded noise standing in for an imperfect upstream estimator.
enum class HandSource { Predicted, GroundTruth };

HandPose hand_pose_for_recon(const GraspScene& scene, HandSource source,
                             double noise_rad = 0.05, std::uint64_t noise_seed = 0);

const char* hand_source_name(HandSource s);
HandSource hand_source_from_name(const std::string& s);

}  // namespace crec
