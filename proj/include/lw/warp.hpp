#pragma once

#include <vector>

#include "lw/feature_map.hpp"
#include "lw/flow.hpp"

namespace lw {

// Bilinear sampling of X at the flow's normalized coordinates under the
// align-corners convention. Invalid flow pixels produce exact zeros;
// out-of-range taps read a zero-padded border. Coordinates within 1e-6 px
// of the pixel lattice collapse to exact element copies, which makes the
// identity warp bit-exact.
FeatureMap bilinear_sample(const FeatureMap& features, const TransformFlow& flow,
                           int threads = 1);

struct LwbSource {
  const FeatureMap* features = nullptr;
  const TransformFlow* flow = nullptr;
};

// Liquid Warping Block aggregation: sum of bilinearly warped sources plus
// the target stream. An empty source list returns the target unchanged.
FeatureMap lwb_aggregate(const std::vector<LwbSource>& sources,
                         const FeatureMap& target_features, int threads = 1);

// Attention/color pair; attention is clamped into [0, 1] on construction.
struct AttentionPair {
  FeatureMap attention;  // 1 x H x W
  FeatureMap color;      // C x H x W

  AttentionPair(FeatureMap attention_map, FeatureMap color_map);
};

// P * A + I_bg * (1 - A), attention broadcast over color channels.
FeatureMap compose_output(const AttentionPair& pair, const FeatureMap& background);

}  // namespace lw
