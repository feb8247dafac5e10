#include "crec/recon/initial.hpp"

namespace crec {

InitialModule::InitialModule(nn::ParamStore& ps, const InitialConfig& c, Rng& rng) : cfg(c) {
  visual = Backbone(ps, "initial.visual", c.visual, rng);
  articulation = nn::Linear(ps, "initial.articulation", 3 * kHandJoints, c.articulation_dim, rng);
}

ad::Var InitialModule::features(nn::ParamStore& ps, const Tensor& image,
                                const HandPose& pose) const {
  const ad::Var vis = visual.forward(ps, image);
  const Tensor art = pose.articulation();
  const ad::Var art_emb =
      articulation(ps, ad::constant(Tensor({1, 3 * kHandJoints}, art.v)));
  return ad::concat_cols({vis, art_emb});
}

InitialPrediction InitialModule::predict(nn::ParamStore& ps, const GraspScene& scene,
                                         const Tensor& image, const HandPose& pose) const {
  InitialPrediction out;
  out.camera = scene.camera;
  const Tensor posed = pose_hand(builtin_template(), builtin_rig(), pose);
  out.hand_mesh = Tensor({HandTemplate::kVertices, 3});
  for (int i = 0; i < HandTemplate::kVertices; ++i) {
    const Vec3 n = scene.wrist_frame.normalize({posed.at(i, 0), posed.at(i, 1), posed.at(i, 2)});
    out.hand_mesh.at(i, 0) = n.x;
    out.hand_mesh.at(i, 1) = n.y;
    out.hand_mesh.at(i, 2) = n.z;
  }
  out.f0 = features(ps, image, pose);
  return out;
}

HandPose hand_pose_for_recon(const GraspScene& scene, HandSource source, double noise_rad,
                             std::uint64_t noise_seed) {
  HandPose pose = scene.hand_pose;
  if (source == HandSource::Predicted) {
    Rng rng(scene.rng_seed * 1315423911ULL + noise_seed);
    for (int j = 0; j < kHandJoints; ++j)
      pose.joint_axis_angle[j] +=
          Vec3{rng.normal(0, noise_rad), rng.normal(0, noise_rad), rng.normal(0, noise_rad)};
  }
  return pose;
}

const char* hand_source_name(HandSource s) {
  return s == HandSource::Predicted ? "predicted" : "ground_truth";
}

HandSource hand_source_from_name(const std::string& s) {
  if (s == "predicted") return HandSource::Predicted;
  if (s == "ground_truth") return HandSource::GroundTruth;
  throw std::runtime_error("unknown hand source: " + s);
}

}  // namespace crec
