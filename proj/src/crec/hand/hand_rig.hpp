#pragma once

#include <array>
#include <vector>

#include "crec/core/tensor.hpp"
#include "crec/geom/vec3.hpp"
#include "crec/hand/hand_template.hpp"

namespace crec {

// 16 joints: wrist + 5 fingers x (mcp, pip, dip).
constexpr int kHandJoints = 16;
constexpr int kFingers = 5;

inline int finger_joint(int finger, int seg) { return 1 + 3 * finger + seg; }  // seg in 0..2

struct HandPose {
  std::array<Vec3, kHandJoints> joint_axis_angle{};  // wrist entry unused (wrist below)
  RigidTransform wrist = RigidTransform::identity();

  // flattened 48-vector of joint axis-angles (articulation embedding input)
  Tensor articulation() const;
};

// Skeleton and linear-blend skinning data for the builtin template.
struct HandRig {
  std::array<int, kHandJoints> parent{};
  std::array<Vec3, kHandJoints> rest_position{};
  // per-joint curl axis in the rest frame (fingers close about this axis)
  std::array<Vec3, kHandJoints> curl_axis{};
  // up to two bone influences per vertex
  std::vector<std::array<int, 2>> skin_joint;
  std::vector<std::array<double, 2>> skin_weight;
  // joint limits for the grasp routine, radians about curl_axis
  std::array<double, kHandJoints> curl_limit{};

  // which joint chain a vertex mainly follows (finger id, -1 = palm)
  std::vector<int> vertex_finger;
};

const HandRig& builtin_rig();

// Linear-blend skinning of the template under a pose. Returns [778,3] world.
Tensor pose_hand(const HandTemplate& t, const HandRig& rig, const HandPose& pose);

// Posed joint positions, [16] world.
std::array<Vec3, kHandJoints> pose_joints(const HandRig& rig, const HandPose& pose);

}  // namespace crec
