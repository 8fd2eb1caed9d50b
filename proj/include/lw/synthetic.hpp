#pragma once

#include <cstdint>

#include "lw/body_model.hpp"
#include "lw/feature_map.hpp"

namespace lw {

// Desk-scale procedural humanoid: six joints (root torso, two arms, two
// legs, head), capsule-primitive limbs, two blendshapes (height, width),
// "head"/"body" vertex groups with the head as a separate component. The
// default pose is a T-pose spanning roughly [-1, 1] in y.
struct SyntheticScene {
  BodyModel model;
  BodyParams source_params;     // rest pose
  BodyParams reference_params;  // raised arm + bent leg variant
};

SyntheticScene make_synthetic_scene(uint64_t seed);

enum class SyntheticJoint : int {
  kRoot = 0,
  kLeftArm = 1,
  kRightArm = 2,
  kLeftLeg = 3,
  kRightLeg = 4,
  kHead = 5,
};

// Renders the posed model with a checkerboard texture anchored to the
// template surface (colors follow the body through pose changes) over a
// horizontal-gradient background. Values in [-1, 1].
FeatureMap render_body_image(const BodyModel& model, const BodyParams& params,
                             int width, int height, int threads = 1);

}  // namespace lw
