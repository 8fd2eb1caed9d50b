#pragma once

#include <vector>

#include "lw/body_model.hpp"
#include "lw/feature_map.hpp"
#include "lw/raster.hpp"

namespace lw {

// Sentinel stored in invalid flow pixels; outside any legal normalized
// coordinate.
constexpr double kInvalidFlow = -2.0;

// H x W x 2 map of normalized source coordinates per target pixel.
struct TransformFlow {
  int width = 0;
  int height = 0;
  std::vector<double> uv;       // 2 per pixel (u, v)
  std::vector<uint8_t> valid;   // 0 or 1

  TransformFlow() = default;
  TransformFlow(int w, int h)
      : width(w), height(h),
        uv(static_cast<size_t>(w) * h * 2, kInvalidFlow),
        valid(static_cast<size_t>(w) * h, 0) {}

  size_t pixel(int y, int x) const { return static_cast<size_t>(y) * width + x; }
  double u(int y, int x) const { return uv[2 * pixel(y, x)]; }
  double v(int y, int x) const { return uv[2 * pixel(y, x) + 1]; }
  void set(int y, int x, double uu, double vv) {
    uv[2 * pixel(y, x)] = uu;
    uv[2 * pixel(y, x) + 1] = vv;
    valid[pixel(y, x)] = 1;
  }
};

// Per-face anchor coordinates: mean of the three projected vertices.
MatX face_coords(const ProjectedMesh& pm);

// For every covered target pixel, the barycentric combination of the
// source's projected vertex coordinates for that pixel's face. The source
// projection must share the face table that produced the target map.
TransformFlow compose_flow(const ProjectedMesh& src, const CorrespondenceMap& target_map);

struct DecomposedSource {
  FeatureMap foreground;  // I_s * mask
  FeatureMap background;  // I_s * (1 - mask)
  Silhouette mask;
};

DecomposedSource decompose(const FeatureMap& source_image, const CorrespondenceMap& source_map);

// Identity flow: every pixel maps to its own normalized center.
TransformFlow mesh_grid(int width, int height);

struct FlowBundle {
  CorrespondenceMap source_map;  // C_s
  CorrespondenceMap target_map;  // C_t
  TransformFlow flow;            // T
};

// Motion imitation: the target takes the reference pose with the source
// shape and camera; both meshes render under the source camera.
FlowBundle flow_for_imitation(const BodyModel& model, const BodyParams& src,
                              const BodyParams& ref, int width, int height,
                              int threads = 1);

// Novel view: target mesh = (M_s - c) * R + c + t with c the source mesh
// centroid (row-vector convention), rendered under the source camera.
FlowBundle flow_for_novel_view(const BodyModel& model, const BodyParams& src,
                               const Mat3& rotation, const Vec3& translation,
                               int width, int height, int threads = 1);

struct SwapFlows {
  TransformFlow head_flow;              // T_1: identity on the head silhouette
  TransformFlow body_flow;              // T_2: reference body -> source body layout
  Silhouette head_silhouette;           // S^h of the source head submesh
  CorrespondenceMap source_body_map;    // C^b_s
  CorrespondenceMap reference_body_map; // C^b_t (reference pose under K_s)
};

// Appearance transfer: T_1 keeps the source head in place (mesh grid masked
// by the head silhouette); T_2 warps the reference body (posed with its own
// theta/beta, projected under the source camera) into the source body
// layout. Requires "head" and "body" vertex groups.
SwapFlows flow_for_swap(const BodyModel& model, const BodyParams& src,
                        const BodyParams& ref, int width, int height,
                        int threads = 1);

// Diagnostic: marks valid flow pixels whose source location is covered by a
// different face (or none) in the source render, i.e. regions the flow
// fetches from source-occluded surface.
Silhouette source_occlusion_mask(const CorrespondenceMap& source_map,
                                 const CorrespondenceMap& target_map,
                                 const TransformFlow& flow);

}  // namespace lw
