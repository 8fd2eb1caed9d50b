#include "lw/raster.hpp"

#include <algorithm>
#include <cmath>

#include "lw/parallel.hpp"

namespace lw {

ProjectedMesh project(const Mesh& mesh, const Camera& camera) {
  camera.validate();
  require(mesh.vertices.allFinite(), "mesh vertices must be finite");

  const int nv = static_cast<int>(mesh.vertices.rows());
  ProjectedMesh pm;
  pm.coords2d.resize(nv, 2);
  pm.depths.resize(nv);
  for (int v = 0; v < nv; ++v) {
    pm.coords2d(v, 0) = camera.scale * mesh.vertices(v, 0) + camera.tx;
    pm.coords2d(v, 1) = camera.scale * mesh.vertices(v, 1) + camera.ty;
    pm.depths(v) = mesh.vertices(v, 2);
  }
  pm.faces = mesh.faces;
  return pm;
}

namespace {

inline double signed_area2(double ax, double ay, double bx, double by,
                           double cx, double cy) {
  return (bx - ax) * (cy - ay) - (cx - ax) * (by - ay);
}

}  // namespace

CorrespondenceMap rasterize(const ProjectedMesh& pm, int width, int height,
                            int threads) {
  require(width >= 1 && height >= 1, "raster target must be at least 1x1");

  const int nf = static_cast<int>(pm.faces.rows());
  CorrespondenceMap cmap;
  cmap.width = width;
  cmap.height = height;
  cmap.num_faces = nf;
  cmap.face_index.assign(static_cast<size_t>(width) * height, kEmptyPixel);
  cmap.bary.assign(static_cast<size_t>(width) * height * 3, 0.0);
  cmap.depth.assign(static_cast<size_t>(width) * height, 0.0);

  parallel_rows(height, threads, [&](int row_begin, int row_end) {
    for (int f = 0; f < nf; ++f) {
      const int i0 = pm.faces(f, 0), i1 = pm.faces(f, 1), i2 = pm.faces(f, 2);
      const double x0 = pm.coords2d(i0, 0), y0 = pm.coords2d(i0, 1);
      const double x1 = pm.coords2d(i1, 0), y1 = pm.coords2d(i1, 1);
      const double x2 = pm.coords2d(i2, 0), y2 = pm.coords2d(i2, 1);

      const double denom = signed_area2(x0, y0, x1, y1, x2, y2);
      if (denom == 0.0) continue;  // zero 2D area

      // Pixel-index bounding box of the triangle, padded one pixel against
      // float slop; the inclusive test below is the real membership rule.
      const double xmin = std::min({x0, x1, x2});
      const double xmax = std::max({x0, x1, x2});
      const double ymin = std::min({y0, y1, y2});
      const double ymax = std::max({y0, y1, y2});
      int px0 = std::max(0, static_cast<int>(std::floor(norm_to_pixel(xmin, width))) - 1);
      int px1 = std::min(width - 1, static_cast<int>(std::ceil(norm_to_pixel(xmax, width))) + 1);
      int py0 = std::max(row_begin, static_cast<int>(std::floor(norm_to_pixel(ymin, height))) - 1);
      int py1 = std::min(row_end - 1, static_cast<int>(std::ceil(norm_to_pixel(ymax, height))) + 1);

      for (int py = py0; py <= py1; ++py) {
        const double y = pixel_to_norm(py, height);
        for (int px = px0; px <= px1; ++px) {
          const double x = pixel_to_norm(px, width);
          const double w0 = signed_area2(x, y, x1, y1, x2, y2) / denom;
          if (w0 < 0.0) continue;
          const double w1 = signed_area2(x0, y0, x, y, x2, y2) / denom;
          if (w1 < 0.0) continue;
          const double w2 = signed_area2(x0, y0, x1, y1, x, y) / denom;
          if (w2 < 0.0) continue;

          const double z = w0 * pm.depths(i0) + w1 * pm.depths(i1) + w2 * pm.depths(i2);
          const size_t p = cmap.pixel(py, px);
          const int32_t old_face = cmap.face_index[p];
          if (old_face != kEmptyPixel &&
              (cmap.depth[p] < z || (cmap.depth[p] == z && old_face < f)))
            continue;
          cmap.face_index[p] = f;
          cmap.depth[p] = z;
          cmap.bary[3 * p + 0] = w0;
          cmap.bary[3 * p + 1] = w1;
          cmap.bary[3 * p + 2] = w2;
        }
      }
    }
  });
  return cmap;
}

Silhouette silhouette(const CorrespondenceMap& cmap) {
  Silhouette s;
  s.width = cmap.width;
  s.height = cmap.height;
  s.mask.resize(cmap.face_index.size());
  for (size_t i = 0; i < cmap.face_index.size(); ++i)
    s.mask[i] = cmap.face_index[i] != kEmptyPixel ? 1 : 0;
  return s;
}

FeatureMap encode_visual(const CorrespondenceMap& cmap) {
  FeatureMap img(3, cmap.height, cmap.width);
  const double nf = std::max(1, cmap.num_faces);
  for (int y = 0; y < cmap.height; ++y) {
    for (int x = 0; x < cmap.width; ++x) {
      const size_t p = cmap.pixel(y, x);
      if (cmap.face_index[p] == kEmptyPixel) continue;
      img.at(0, y, x) = static_cast<float>(cmap.face_index[p] / nf);
      img.at(1, y, x) = static_cast<float>(cmap.bary[3 * p + 0]);
      img.at(2, y, x) = static_cast<float>(cmap.bary[3 * p + 1]);
    }
  }
  return img;
}

int32_t decode_visual_face(float channel0, int num_faces) {
  return static_cast<int32_t>(std::lround(static_cast<double>(channel0) * num_faces));
}

}  // namespace lw
