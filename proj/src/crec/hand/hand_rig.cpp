#include "crec/hand/hand_rig.hpp"

namespace crec {

Tensor HandPose::articulation() const {
  Tensor t({kHandJoints * 3});
  for (int j = 0; j < kHandJoints; ++j) {
    t.at(3 * j) = joint_axis_angle[j].x;
    t.at(3 * j + 1) = joint_axis_angle[j].y;
    t.at(3 * j + 2) = joint_axis_angle[j].z;
  }
  return t;
}

// Global transform per joint: rotate about the joint's rest position, composed
// down the chain, with the wrist transform outermost.
static std::array<RigidTransform, kHandJoints> joint_transforms(const HandRig& rig,
                                                               const HandPose& pose) {
  std::array<RigidTransform, kHandJoints> g;
  for (int j = 0; j < kHandJoints; ++j) {
    const Mat3 r = Mat3::axis_angle(pose.joint_axis_angle[j]);
    const Vec3 c = rig.rest_position[j];
    const RigidTransform local{r, c - r * c};  // rotation about point c
    g[j] = rig.parent[j] < 0 ? local.then(pose.wrist) : local.then(g[rig.parent[j]]);
  }
  return g;
}

Tensor pose_hand(const HandTemplate& t, const HandRig& rig, const HandPose& pose) {
  const auto g = joint_transforms(rig, pose);
  Tensor out({HandTemplate::kVertices, 3});
  for (int i = 0; i < HandTemplate::kVertices; ++i) {
    const Vec3 v{t.vertices.at(i, 0), t.vertices.at(i, 1), t.vertices.at(i, 2)};
    Vec3 p{0, 0, 0};
    for (int s = 0; s < 2; ++s) {
      const int j = rig.skin_joint[i][s];
      const double w = rig.skin_weight[i][s];
      if (j < 0 || w == 0.0) continue;
      p += g[j].apply(v) * w;
    }
    out.at(i, 0) = p.x;
    out.at(i, 1) = p.y;
    out.at(i, 2) = p.z;
  }
  return out;
}

std::array<Vec3, kHandJoints> pose_joints(const HandRig& rig, const HandPose& pose) {
  const auto g = joint_transforms(rig, pose);
  std::array<Vec3, kHandJoints> out;
  for (int j = 0; j < kHandJoints; ++j) out[j] = g[j].apply(rig.rest_position[j]);
  return out;
}

}  // namespace crec
