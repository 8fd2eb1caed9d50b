#include "lw/flow.hpp"

#include <cmath>

namespace lw {

MatX face_coords(const ProjectedMesh& pm) {
  const int nf = static_cast<int>(pm.faces.rows());
  MatX coords(nf, 2);
  for (int f = 0; f < nf; ++f) {
    coords.row(f) = (pm.coords2d.row(pm.faces(f, 0)) +
                     pm.coords2d.row(pm.faces(f, 1)) +
                     pm.coords2d.row(pm.faces(f, 2))) / 3.0;
  }
  return coords;
}

TransformFlow compose_flow(const ProjectedMesh& src,
                           const CorrespondenceMap& target_map) {
  require(static_cast<int>(src.faces.rows()) == target_map.num_faces,
          "compose_flow: source face table does not match the target map");

  TransformFlow flow(target_map.width, target_map.height);
  for (int y = 0; y < target_map.height; ++y) {
    for (int x = 0; x < target_map.width; ++x) {
      const size_t p = target_map.pixel(y, x);
      const int32_t f = target_map.face_index[p];
      if (f == kEmptyPixel) continue;
      const double w0 = target_map.bary[3 * p + 0];
      const double w1 = target_map.bary[3 * p + 1];
      const double w2 = target_map.bary[3 * p + 2];
      const int i0 = src.faces(f, 0), i1 = src.faces(f, 1), i2 = src.faces(f, 2);
      flow.set(y, x,
               w0 * src.coords2d(i0, 0) + w1 * src.coords2d(i1, 0) + w2 * src.coords2d(i2, 0),
               w0 * src.coords2d(i0, 1) + w1 * src.coords2d(i1, 1) + w2 * src.coords2d(i2, 1));
    }
  }
  return flow;
}

DecomposedSource decompose(const FeatureMap& source_image,
                           const CorrespondenceMap& source_map) {
  require(source_image.height == source_map.height &&
              source_image.width == source_map.width,
          "decompose: image and correspondence map dimensions differ");

  DecomposedSource out;
  out.mask = silhouette(source_map);
  out.foreground = FeatureMap(source_image.channels, source_image.height,
                              source_image.width);
  out.background = out.foreground;
  for (int c = 0; c < source_image.channels; ++c) {
    for (int y = 0; y < source_image.height; ++y) {
      for (int x = 0; x < source_image.width; ++x) {
        const float v = source_image.at(c, y, x);
        if (out.mask.mask[out.mask.pixel(y, x)])
          out.foreground.at(c, y, x) = v;
        else
          out.background.at(c, y, x) = v;
      }
    }
  }
  return out;
}

TransformFlow mesh_grid(int width, int height) {
  require(width >= 1 && height >= 1, "mesh_grid dims must be >= 1");
  TransformFlow flow(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      flow.set(y, x, pixel_to_norm(x, width), pixel_to_norm(y, height));
  return flow;
}

FlowBundle flow_for_imitation(const BodyModel& model, const BodyParams& src,
                              const BodyParams& ref, int width, int height,
                              int threads) {
  src.validate(model);
  ref.validate(model);

  // Reference pose, source shape, source camera.
  BodyParams target = src;
  target.theta = ref.theta;

  ProjectedMesh src_pm = project(skin(model, src), src.camera);
  ProjectedMesh tgt_pm = project(skin(model, target), src.camera);

  FlowBundle out;
  out.source_map = rasterize(src_pm, width, height, threads);
  out.target_map = rasterize(tgt_pm, width, height, threads);
  out.flow = compose_flow(src_pm, out.target_map);
  return out;
}

FlowBundle flow_for_novel_view(const BodyModel& model, const BodyParams& src,
                               const Mat3& rotation, const Vec3& translation,
                               int width, int height, int threads) {
  src.validate(model);
  require(translation.allFinite(), "view translation must be finite");
  require((rotation.transpose() * rotation - Mat3::Identity())
                  .cwiseAbs().maxCoeff() < 1e-6 &&
              std::abs(rotation.determinant() - 1.0) < 1e-6,
          "view rotation must be orthonormal with determinant +1");

  Mesh source_mesh = skin(model, src);
  Vec3 centroid = source_mesh.centroid();

  Mesh target_mesh = source_mesh;
  for (int v = 0; v < target_mesh.vertices.rows(); ++v) {
    Eigen::RowVector3d row = target_mesh.vertices.row(v) - centroid.transpose();
    target_mesh.vertices.row(v) =
        row * rotation + centroid.transpose() + translation.transpose();
  }

  ProjectedMesh src_pm = project(source_mesh, src.camera);
  ProjectedMesh tgt_pm = project(target_mesh, src.camera);

  FlowBundle out;
  out.source_map = rasterize(src_pm, width, height, threads);
  out.target_map = rasterize(tgt_pm, width, height, threads);
  out.flow = compose_flow(src_pm, out.target_map);
  return out;
}

SwapFlows flow_for_swap(const BodyModel& model, const BodyParams& src,
                        const BodyParams& ref, int width, int height,
                        int threads) {
  src.validate(model);
  ref.validate(model);
  const std::vector<int>& head_ids = model.group("head");
  const std::vector<int>& body_ids = model.group("body");

  Mesh src_posed = skin(model, src);
  Mesh ref_posed = skin(model, ref);

  SwapFlows out;

  // T_1: mesh grid masked by the source head silhouette.
  Mesh src_head = submesh(src_posed, head_ids);
  out.head_silhouette =
      silhouette(rasterize(project(src_head, src.camera), width, height, threads));
  TransformFlow grid = mesh_grid(width, height);
  out.head_flow = TransformFlow(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (out.head_silhouette.mask[out.head_silhouette.pixel(y, x)])
        out.head_flow.set(y, x, grid.u(y, x), grid.v(y, x));
    }
  }

  // T_2: reference body (own pose and shape, projected under the source
  // camera) warped into the source body layout.
  Mesh src_body = submesh(src_posed, body_ids);
  Mesh ref_body = submesh(ref_posed, body_ids);
  ProjectedMesh ref_body_pm = project(ref_body, src.camera);
  out.source_body_map =
      rasterize(project(src_body, src.camera), width, height, threads);
  out.reference_body_map = rasterize(ref_body_pm, width, height, threads);
  out.body_flow = compose_flow(ref_body_pm, out.source_body_map);
  return out;
}

Silhouette source_occlusion_mask(const CorrespondenceMap& source_map,
                                 const CorrespondenceMap& target_map,
                                 const TransformFlow& flow) {
  require(flow.width == target_map.width && flow.height == target_map.height,
          "occlusion mask: flow and target map dimensions differ");

  Silhouette occluded;
  occluded.width = flow.width;
  occluded.height = flow.height;
  occluded.mask.assign(static_cast<size_t>(flow.width) * flow.height, 0);
  for (int y = 0; y < flow.height; ++y) {
    for (int x = 0; x < flow.width; ++x) {
      const size_t p = flow.pixel(y, x);
      if (!flow.valid[p]) continue;
      const int sx = static_cast<int>(std::lround(norm_to_pixel(flow.u(y, x), source_map.width)));
      const int sy = static_cast<int>(std::lround(norm_to_pixel(flow.v(y, x), source_map.height)));
      if (sx < 0 || sx >= source_map.width || sy < 0 || sy >= source_map.height) {
        occluded.mask[p] = 1;
        continue;
      }
      if (source_map.face_index[source_map.pixel(sy, sx)] != target_map.face_index[p])
        occluded.mask[p] = 1;
    }
  }
  return occluded;
}

}  // namespace lw
