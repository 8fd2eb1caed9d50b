#pragma once

#include <cstddef>
#include <vector>

#include "lw/errors.hpp"

namespace lw {

// Dense C x H x W float tensor, row-major with channel as the outermost
// dimension. Images are FeatureMaps with C=3 and values in [-1, 1].
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w)
      : channels(c), height(h), width(w),
        data(static_cast<size_t>(c) * h * w, 0.0f) {
    require(c >= 1 && h >= 1 && w >= 1, "FeatureMap dims must be >= 1");
  }

  size_t size() const { return data.size(); }

  size_t index(int c, int y, int x) const {
    return (static_cast<size_t>(c) * height + y) * width + x;
  }
  float& at(int c, int y, int x) { return data[index(c, y, x)]; }
  float at(int c, int y, int x) const { return data[index(c, y, x)]; }

  bool same_shape(const FeatureMap& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
};

inline FeatureMap constant_map(int c, int h, int w, float value) {
  FeatureMap m(c, h, w);
  std::fill(m.data.begin(), m.data.end(), value);
  return m;
}

}  // namespace lw
