#pragma once

#include <cstdint>
#include <vector>

#include "lw/body_model.hpp"
#include "lw/feature_map.hpp"

namespace lw {

// Engine-wide image coordinate convention: pixel x of a W-wide image samples
// normalized coordinate 2x/(W-1) - 1 (align-corners; the centers of the
// outermost pixels sit exactly at -1 and +1). A 1-wide axis samples 0.
inline double pixel_to_norm(int index, int size) {
  return size > 1 ? 2.0 * index / (size - 1) - 1.0 : 0.0;
}
inline double norm_to_pixel(double coord, int size) {
  return size > 1 ? (coord + 1.0) * 0.5 * (size - 1) : 0.0;
}

struct ProjectedMesh {
  MatX coords2d;           // Nv x 2 normalized image coordinates
  Eigen::VectorXd depths;  // Nv, smaller z is nearer
  Eigen::MatrixXi faces;   // Nf x 3, shared with the source mesh
};

constexpr int32_t kEmptyPixel = -1;

// Per-pixel face / barycentric / depth buffer from a z-buffered render.
struct CorrespondenceMap {
  int width = 0;
  int height = 0;
  int num_faces = 0;
  std::vector<int32_t> face_index;  // kEmptyPixel where uncovered
  std::vector<double> bary;         // 3 per pixel
  std::vector<double> depth;

  size_t pixel(int y, int x) const { return static_cast<size_t>(y) * width + x; }
  bool covered(int y, int x) const { return face_index[pixel(y, x)] != kEmptyPixel; }
};

struct Silhouette {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> mask;  // 0 or 1, row-major

  size_t pixel(int y, int x) const { return static_cast<size_t>(y) * width + x; }
};

// coords2d = s * (x, y) + (tx, ty); depth = z unchanged.
ProjectedMesh project(const Mesh& mesh, const Camera& camera);

// Deterministic z-buffer rasterizer. A pixel belongs to the front-most
// (smallest interpolated depth) triangle whose inclusive point-in-triangle
// test passes at the pixel's normalized center; equal depths break toward
// the lower face index. Zero-area triangles are skipped. Output is
// bit-identical for any thread count.
CorrespondenceMap rasterize(const ProjectedMesh& pm, int width, int height,
                            int threads = 1);

Silhouette silhouette(const CorrespondenceMap& cmap);

// 3-channel encoding (face_index / N_f, w1, w2); empty pixels are (0,0,0).
// Engine convention, lossless back to the face bucket for N_f <= 2^16.
FeatureMap encode_visual(const CorrespondenceMap& cmap);

// Inverse of encode_visual's first channel.
int32_t decode_visual_face(float channel0, int num_faces);

}  // namespace lw
