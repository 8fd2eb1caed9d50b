#include "lw/warp.hpp"

#include <algorithm>
#include <cmath>

#include "lw/parallel.hpp"
#include "lw/raster.hpp"

namespace lw {

namespace {

constexpr double kLatticeSnap = 1e-6;  // pixels

// Resolved sample stencil for one output pixel: four source offsets with
// weights, out-of-range taps weighted zero. kind 0 = dead (exact zero),
// kind 1 = direct element copy, kind 2 = bilinear blend.
struct Tap {
  uint32_t idx[4] = {0, 0, 0, 0};
  double w[4] = {0, 0, 0, 0};
  uint8_t kind = 0;
};

Tap make_tap(const TransformFlow& flow, size_t p, int src_w, int src_h) {
  Tap t;
  if (!flow.valid[p]) return t;
  double fx = norm_to_pixel(flow.uv[2 * p], src_w);
  double fy = norm_to_pixel(flow.uv[2 * p + 1], src_h);
  const double rx = std::nearbyint(fx);
  const double ry = std::nearbyint(fy);
  if (std::abs(fx - rx) <= kLatticeSnap) fx = rx;
  if (std::abs(fy - ry) <= kLatticeSnap) fy = ry;

  const double fx0 = std::floor(fx);
  const double fy0 = std::floor(fy);
  const int x0 = static_cast<int>(fx0);
  const int y0 = static_cast<int>(fy0);
  const double ax = fx - fx0;
  const double ay = fy - fy0;

  if (ax == 0.0 && ay == 0.0 && x0 >= 0 && x0 < src_w && y0 >= 0 && y0 < src_h) {
    t.kind = 1;
    t.idx[0] = static_cast<uint32_t>(y0) * src_w + x0;
    return t;
  }
  if (x0 >= src_w || y0 >= src_h || x0 + 1 < 0 || y0 + 1 < 0) return t;

  const double wx[2] = {1.0 - ax, ax};
  const double wy[2] = {1.0 - ay, ay};
  int n = 0;
  for (int dy = 0; dy < 2; ++dy) {
    for (int dx = 0; dx < 2; ++dx) {
      const int xx = x0 + dx, yy = y0 + dy;
      if (xx < 0 || xx >= src_w || yy < 0 || yy >= src_h) continue;
      t.idx[n] = static_cast<uint32_t>(yy) * src_w + xx;
      t.w[n] = wy[dy] * wx[dx];
      ++n;
    }
  }
  t.kind = 2;
  return t;
}

}  // namespace

FeatureMap bilinear_sample(const FeatureMap& features, const TransformFlow& flow,
                           int threads) {
  const int src_w = features.width, src_h = features.height;
  FeatureMap out(features.channels, flow.height, flow.width);

  std::vector<Tap> taps(static_cast<size_t>(flow.width) * flow.height);
  for (size_t p = 0; p < taps.size(); ++p)
    taps[p] = make_tap(flow, p, src_w, src_h);

  const size_t src_plane = static_cast<size_t>(src_w) * src_h;
  const size_t out_plane = static_cast<size_t>(flow.width) * flow.height;
  parallel_rows(flow.height, threads, [&](int row_begin, int row_end) {
    for (int c = 0; c < features.channels; ++c) {
      const float* src = features.data.data() + c * src_plane;
      float* dst = out.data.data() + c * out_plane;
      for (size_t p = static_cast<size_t>(row_begin) * flow.width,
                  end = static_cast<size_t>(row_end) * flow.width;
           p < end; ++p) {
        const Tap& t = taps[p];
        if (t.kind == 0) continue;
        if (t.kind == 1) {
          dst[p] = src[t.idx[0]];
          continue;
        }
        dst[p] = static_cast<float>(t.w[0] * src[t.idx[0]] + t.w[1] * src[t.idx[1]] +
                                    t.w[2] * src[t.idx[2]] + t.w[3] * src[t.idx[3]]);
      }
    }
  });
  return out;
}

FeatureMap lwb_aggregate(const std::vector<LwbSource>& sources,
                         const FeatureMap& target_features, int threads) {
  FeatureMap out = target_features;
  for (const LwbSource& s : sources) {
    require(s.features && s.flow, "lwb_aggregate: null source entry");
    require(s.features->channels == target_features.channels,
            "lwb_aggregate: source channel count differs from target");
    FeatureMap warped = bilinear_sample(*s.features, *s.flow, threads);
    require(warped.same_shape(target_features),
            "lwb_aggregate: warped source shape differs from target");
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += warped.data[i];
  }
  return out;
}

AttentionPair::AttentionPair(FeatureMap attention_map, FeatureMap color_map)
    : attention(std::move(attention_map)), color(std::move(color_map)) {
  require(attention.channels == 1, "attention map must have one channel");
  require(attention.height == color.height && attention.width == color.width,
          "attention and color dimensions differ");
  for (float& a : attention.data) a = std::clamp(a, 0.0f, 1.0f);
}

FeatureMap compose_output(const AttentionPair& pair, const FeatureMap& background) {
  require(background.same_shape(pair.color),
          "compose_output: background and color dimensions differ");
  FeatureMap out(pair.color.channels, pair.color.height, pair.color.width);
  for (int c = 0; c < out.channels; ++c) {
    for (int y = 0; y < out.height; ++y) {
      for (int x = 0; x < out.width; ++x) {
        const float a = pair.attention.at(0, y, x);
        out.at(c, y, x) = pair.color.at(c, y, x) * a +
                          background.at(c, y, x) * (1.0f - a);
      }
    }
  }
  return out;
}

}  // namespace lw
