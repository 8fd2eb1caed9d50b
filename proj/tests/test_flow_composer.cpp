#include <doctest.h>

#include <numbers>
#include <random>

#include "lw/flow.hpp"
#include "lw/synthetic.hpp"
#include "test_support.hpp"

using namespace lw;

namespace {

// Set bits of `a` all within one pixel of a set bit of `b`.
bool within_one_pixel(const Silhouette& a, const Silhouette& b) {
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      if (!a.mask[a.pixel(y, x)]) continue;
      bool near = false;
      for (int dy = -1; dy <= 1 && !near; ++dy)
        for (int dx = -1; dx <= 1 && !near; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (yy >= 0 && yy < b.height && xx >= 0 && xx < b.width &&
              b.mask[b.pixel(yy, xx)])
            near = true;
        }
      if (!near) return false;
    }
  }
  return true;
}

int silhouette_height(const Silhouette& s) {
  int ymin = s.height, ymax = -1;
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x)
      if (s.mask[s.pixel(y, x)]) {
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
  return ymax >= ymin ? ymax - ymin + 1 : 0;
}

}  // namespace

TEST_CASE("face_coords: centroid of an equilateral-ish triangle") {
  ProjectedMesh pm;
  pm.coords2d.resize(3, 2);
  pm.coords2d << 0.0, 0.0, 0.6, 0.0, 0.3, 0.9;
  pm.depths.resize(3);
  pm.depths.setZero();
  pm.faces.resize(1, 3);
  pm.faces << 0, 1, 2;
  MatX fc = face_coords(pm);
  CHECK(fc(0, 0) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(fc(0, 1) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("face_coords: translation equivariance and loop oracle") {
  std::mt19937 rng(51);
  ProjectedMesh pm = lwtest::random_projected_mesh(rng, 15);

  MatX fc = face_coords(pm);

  ProjectedMesh shifted = pm;
  shifted.coords2d.col(0).array() += 0.25;
  shifted.coords2d.col(1).array() -= 0.4;
  MatX fc2 = face_coords(shifted);
  for (int f = 0; f < 15; ++f) {
    CHECK(fc2(f, 0) - fc(f, 0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(fc2(f, 1) - fc(f, 1) == doctest::Approx(-0.4).epsilon(1e-12));
  }

  for (int f = 0; f < 15; ++f) {
    double sx = 0, sy = 0;
    for (int k = 0; k < 3; ++k) {
      sx += pm.coords2d(pm.faces(f, k), 0);
      sy += pm.coords2d(pm.faces(f, k), 1);
    }
    CHECK(std::abs(fc(f, 0) - sx / 3.0) < 1e-12);
    CHECK(std::abs(fc(f, 1) - sy / 3.0) < 1e-12);
  }
}

TEST_CASE("compose_flow: self-correspondence is the identity grid on coverage") {
  SyntheticScene scene = make_synthetic_scene(0);
  ProjectedMesh pm =
      project(skin(scene.model, scene.source_params), scene.source_params.camera);
  CorrespondenceMap cmap = rasterize(pm, 96, 96);
  TransformFlow flow = compose_flow(pm, cmap);
  TransformFlow grid = mesh_grid(96, 96);

  int covered = 0;
  for (int y = 0; y < 96; ++y) {
    for (int x = 0; x < 96; ++x) {
      const size_t p = flow.pixel(y, x);
      CHECK(flow.valid[p] == (cmap.covered(y, x) ? 1 : 0));
      if (!flow.valid[p]) continue;
      ++covered;
      CHECK(std::abs(flow.u(y, x) - grid.u(y, x)) < 1e-4);
      CHECK(std::abs(flow.v(y, x) - grid.v(y, x)) < 1e-4);
    }
  }
  CHECK(covered > 500);
}

TEST_CASE("compose_flow: source camera offset shifts the flow by delta") {
  SyntheticScene scene = make_synthetic_scene(0);
  Mesh posed = skin(scene.model, scene.source_params);
  const double delta = 0.17;

  Camera target_cam = scene.source_params.camera;
  Camera source_cam = target_cam;
  source_cam.tx += delta;

  CorrespondenceMap target = rasterize(project(posed, target_cam), 64, 64);
  TransformFlow flow = compose_flow(project(posed, source_cam), target);
  TransformFlow grid = mesh_grid(64, 64);

  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      if (flow.valid[flow.pixel(y, x)]) {
        CHECK(std::abs(flow.u(y, x) - (grid.u(y, x) + delta)) < 1e-4);
        CHECK(std::abs(flow.v(y, x) - grid.v(y, x)) < 1e-4);
      }
}

TEST_CASE("compose_flow: exact per-pixel recomputation from raw buffers") {
  SyntheticScene scene = make_synthetic_scene(3);
  std::mt19937 rng(52);
  std::uniform_real_distribution<double> pose(-0.8, 0.8);

  for (int trial = 0; trial < 5; ++trial) {
    BodyParams src = scene.source_params;
    BodyParams ref = scene.source_params;
    for (double& t : ref.theta) t = pose(rng);

    ProjectedMesh src_pm = project(skin(scene.model, src), src.camera);
    CorrespondenceMap target =
        rasterize(project(skin(scene.model, ref), src.camera), 64, 64);
    TransformFlow flow = compose_flow(src_pm, target);

    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        const size_t p = target.pixel(y, x);
        const int32_t f = target.face_index[p];
        if (f == kEmptyPixel) {
          CHECK(flow.valid[p] == 0);
          CHECK(flow.u(y, x) == kInvalidFlow);
          continue;
        }
        double eu = 0, ev = 0;
        for (int k = 0; k < 3; ++k) {
          eu += target.bary[3 * p + k] * src_pm.coords2d(src_pm.faces(f, k), 0);
          ev += target.bary[3 * p + k] * src_pm.coords2d(src_pm.faces(f, k), 1);
        }
        CHECK(flow.u(y, x) == eu);
        CHECK(flow.v(y, x) == ev);
      }
    }
  }
}

TEST_CASE("compose_flow rejects a mismatched face table") {
  std::mt19937 rng(53);
  ProjectedMesh pm = lwtest::random_projected_mesh(rng, 10);
  CorrespondenceMap cmap = rasterize(pm, 16, 16);
  ProjectedMesh other = lwtest::random_projected_mesh(rng, 11);
  CHECK_THROWS_AS(compose_flow(other, cmap), ValidationError);
}

TEST_CASE("decompose: masks partition the image") {
  SyntheticScene scene = make_synthetic_scene(0);
  CorrespondenceMap cmap = rasterize(
      project(skin(scene.model, scene.source_params), scene.source_params.camera),
      64, 64);
  FeatureMap image = render_body_image(scene.model, scene.source_params, 64, 64);

  DecomposedSource dec = decompose(image, cmap);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x)
        CHECK(dec.foreground.at(c, y, x) + dec.background.at(c, y, x) ==
              image.at(c, y, x));
}

TEST_CASE("decompose: empty and full coverage") {
  FeatureMap image(3, 8, 8);
  for (size_t i = 0; i < image.data.size(); ++i) image.data[i] = 0.01f * i - 0.9f;

  CorrespondenceMap empty;
  empty.width = empty.height = 8;
  empty.face_index.assign(64, kEmptyPixel);
  empty.bary.assign(192, 0.0);
  empty.depth.assign(64, 0.0);

  DecomposedSource dec = decompose(image, empty);
  for (float v : dec.foreground.data) CHECK(v == 0.0f);
  CHECK(dec.background.data == image.data);

  CorrespondenceMap full = empty;
  std::fill(full.face_index.begin(), full.face_index.end(), 0);
  full.num_faces = 1;
  DecomposedSource dec2 = decompose(image, full);
  CHECK(dec2.foreground.data == image.data);
  for (float v : dec2.background.data) CHECK(v == 0.0f);
}

TEST_CASE("decompose: half-plane coverage splits along the mask") {
  ProjectedMesh pm;
  pm.coords2d.resize(3, 2);
  pm.coords2d << -3.0, -3.0, 0.0, 0.0, -3.0, 3.0;
  pm.depths.resize(3);
  pm.depths << 0.5, 0.5, 0.5;
  pm.faces.resize(1, 3);
  pm.faces << 0, 1, 2;
  CorrespondenceMap cmap = rasterize(pm, 32, 32);
  Silhouette mask = silhouette(cmap);

  FeatureMap image(3, 32, 32);
  for (size_t i = 0; i < image.data.size(); ++i) image.data[i] = 0.001f * i;
  DecomposedSource dec = decompose(image, cmap);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      const bool fg = mask.mask[mask.pixel(y, x)] != 0;
      for (int c = 0; c < 3; ++c) {
        CHECK(dec.foreground.at(c, y, x) == (fg ? image.at(c, y, x) : 0.0f));
        CHECK(dec.background.at(c, y, x) == (fg ? 0.0f : image.at(c, y, x)));
      }
    }
  CHECK(dec.mask.mask == mask.mask);
}

TEST_CASE("decompose rejects mismatched dimensions") {
  FeatureMap image(3, 8, 8);
  CorrespondenceMap cmap;
  cmap.width = cmap.height = 4;
  cmap.face_index.assign(16, kEmptyPixel);
  cmap.bary.assign(48, 0.0);
  cmap.depth.assign(16, 0.0);
  CHECK_THROWS_AS(decompose(image, cmap), ValidationError);
}

TEST_CASE("mesh_grid: 2x2 corners and odd-grid center") {
  TransformFlow g2 = mesh_grid(2, 2);
  CHECK(g2.u(0, 0) == -1.0);
  CHECK(g2.v(0, 0) == -1.0);
  CHECK(g2.u(0, 1) == 1.0);
  CHECK(g2.v(0, 1) == -1.0);
  CHECK(g2.u(1, 0) == -1.0);
  CHECK(g2.v(1, 0) == 1.0);
  CHECK(g2.u(1, 1) == 1.0);
  CHECK(g2.v(1, 1) == 1.0);

  TransformFlow g5 = mesh_grid(5, 7);
  CHECK(g5.u(3, 2) == 0.0);
  CHECK(g5.v(3, 2) == 0.0);
  for (uint8_t v : g5.valid) CHECK(v == 1);
}

TEST_CASE("flow_for_imitation: self-imitation flow is the identity on coverage") {
  SyntheticScene scene = make_synthetic_scene(0);
  FlowBundle bundle = flow_for_imitation(scene.model, scene.source_params,
                                         scene.source_params, 64, 64);
  TransformFlow grid = mesh_grid(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      if (bundle.flow.valid[bundle.flow.pixel(y, x)]) {
        CHECK(std::abs(bundle.flow.u(y, x) - grid.u(y, x)) < 1e-4);
        CHECK(std::abs(bundle.flow.v(y, x) - grid.v(y, x)) < 1e-4);
      }
}

TEST_CASE("flow_for_imitation: target keeps the source shape") {
  SyntheticScene scene = make_synthetic_scene(0);
  BodyParams src = scene.source_params;
  src.beta = {0.5, 0.0};  // tall source
  BodyParams ref = scene.reference_params;
  ref.beta = {-0.4, 0.0};  // short reference

  FlowBundle bundle = flow_for_imitation(scene.model, src, ref, 128, 128);
  const int target_height = silhouette_height(silhouette(bundle.target_map));

  BodyParams with_src_shape = ref;
  with_src_shape.beta = src.beta;
  with_src_shape.camera = src.camera;
  CorrespondenceMap expect_map =
      rasterize(project(skin(scene.model, with_src_shape), src.camera), 128, 128);
  const int expect_height = silhouette_height(silhouette(expect_map));

  BodyParams with_ref_shape = with_src_shape;
  with_ref_shape.beta = ref.beta;
  CorrespondenceMap wrong_map =
      rasterize(project(skin(scene.model, with_ref_shape), src.camera), 128, 128);
  const int wrong_height = silhouette_height(silhouette(wrong_map));

  CHECK(std::abs(target_height - expect_height) <= 1);
  CHECK(std::abs(target_height - wrong_height) > 4);
}

TEST_CASE("flow_for_imitation: arm pixels follow the rigid rotation") {
  SyntheticScene scene = make_synthetic_scene(0);
  BodyParams src = scene.source_params;
  src.camera = {0.9, 0.0, 0.0};
  BodyParams ref = src;
  // Left arm straight up: -90 degrees about z.
  ref.theta[3 * static_cast<int>(SyntheticJoint::kLeftArm) + 2] = -std::numbers::pi / 2;

  FlowBundle bundle = flow_for_imitation(scene.model, src, ref, 128, 128);

  const int arm = static_cast<int>(SyntheticJoint::kLeftArm);
  auto is_arm_face = [&](int32_t f) {
    for (int k = 0; k < 3; ++k)
      if (scene.model.skinning_weights(scene.model.faces(f, k), arm) != 1.0)
        return false;
    return true;
  };

  const Vec3 pivot =
      (scene.model.joint_regressor * scene.model.template_vertices).row(arm).transpose();
  const double s = src.camera.scale;
  const double cx = s * pivot.x() + src.camera.tx;
  const double cy = s * pivot.y() + src.camera.ty;

  int checked = 0;
  for (int y = 0; y < 128; ++y) {
    for (int x = 0; x < 128; ++x) {
      const size_t p = bundle.target_map.pixel(y, x);
      const int32_t f = bundle.target_map.face_index[p];
      if (f == kEmptyPixel || !is_arm_face(f)) continue;
      ++checked;
      // Rotation by -90 about z maps offsets (dx, dy) -> (dy, -dx); invert it.
      const double qx = pixel_to_norm(x, 128) - cx;
      const double qy = pixel_to_norm(y, 128) - cy;
      const double ex = cx - qy;
      const double ey = cy + qx;
      CHECK(std::abs(bundle.flow.u(y, x) - ex) < 1e-3);
      CHECK(std::abs(bundle.flow.v(y, x) - ey) < 1e-3);
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("flow_for_novel_view: identity view gives the identity flow") {
  SyntheticScene scene = make_synthetic_scene(0);
  FlowBundle bundle = flow_for_novel_view(scene.model, scene.source_params,
                                          Mat3::Identity(), Vec3::Zero(), 64, 64);
  TransformFlow grid = mesh_grid(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      if (bundle.flow.valid[bundle.flow.pixel(y, x)]) {
        CHECK(std::abs(bundle.flow.u(y, x) - grid.u(y, x)) < 1e-4);
        CHECK(std::abs(bundle.flow.v(y, x) - grid.v(y, x)) < 1e-4);
      }
}

TEST_CASE("flow_for_novel_view: x-translation shifts the flow by -s*delta") {
  // A target pixel fetches source content from its own position minus the
  // subject's image-space displacement.
  SyntheticScene scene = make_synthetic_scene(0);
  const double delta = 0.12;
  const double s = scene.source_params.camera.scale;

  FlowBundle bundle = flow_for_novel_view(scene.model, scene.source_params,
                                          Mat3::Identity(), Vec3(delta, 0, 0),
                                          64, 64);
  TransformFlow grid = mesh_grid(64, 64);
  int covered = 0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      if (bundle.flow.valid[bundle.flow.pixel(y, x)]) {
        ++covered;
        CHECK(std::abs(bundle.flow.u(y, x) - (grid.u(y, x) - s * delta)) < 1e-4);
        CHECK(std::abs(bundle.flow.v(y, x) - grid.v(y, x)) < 1e-4);
      }
  CHECK(covered > 200);
}

TEST_CASE("flow_for_novel_view: 180-degree yaw mirrors the silhouette") {
  SyntheticScene scene = make_synthetic_scene(0);
  BodyParams src = scene.source_params;
  src.camera = {0.9, 0.0, 0.0};

  Mat3 yaw180;
  yaw180 << -1, 0, 0, 0, 1, 0, 0, 0, -1;
  FlowBundle bundle =
      flow_for_novel_view(scene.model, src, yaw180, Vec3::Zero(), 128, 128);
  Silhouette turned = silhouette(bundle.target_map);

  FlowBundle front = flow_for_novel_view(scene.model, src, Mat3::Identity(),
                                         Vec3::Zero(), 128, 128);
  Silhouette mirrored = silhouette(front.target_map);
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 64; ++x)
      std::swap(mirrored.mask[mirrored.pixel(y, x)],
                mirrored.mask[mirrored.pixel(y, 127 - x)]);

  CHECK(within_one_pixel(turned, mirrored));
  CHECK(within_one_pixel(mirrored, turned));
}

TEST_CASE("flow_for_novel_view: full turn equals no turn") {
  SyntheticScene scene = make_synthetic_scene(0);
  const double two_pi = 2.0 * std::numbers::pi;
  Mat3 full;
  full << std::cos(two_pi), 0, std::sin(two_pi),
          0, 1, 0,
          -std::sin(two_pi), 0, std::cos(two_pi);

  FlowBundle a = flow_for_novel_view(scene.model, scene.source_params, full,
                                     Vec3::Zero(), 64, 64);
  FlowBundle b = flow_for_novel_view(scene.model, scene.source_params,
                                     Mat3::Identity(), Vec3::Zero(), 64, 64);
  CHECK(a.flow.valid == b.flow.valid);
  for (size_t p = 0; p < a.flow.valid.size(); ++p)
    if (a.flow.valid[p]) {
      CHECK(std::abs(a.flow.uv[2 * p] - b.flow.uv[2 * p]) < 1e-4);
      CHECK(std::abs(a.flow.uv[2 * p + 1] - b.flow.uv[2 * p + 1]) < 1e-4);
    }
}

TEST_CASE("flow_for_novel_view rejects a non-orthonormal rotation") {
  SyntheticScene scene = make_synthetic_scene(0);
  Mat3 bad = Mat3::Identity();
  bad(0, 0) = 1.5;
  CHECK_THROWS_AS(flow_for_novel_view(scene.model, scene.source_params, bad,
                                      Vec3::Zero(), 32, 32),
                  ValidationError);
}

TEST_CASE("flow_for_swap: T1 is the mesh grid exactly on the head silhouette") {
  SyntheticScene scene = make_synthetic_scene(0);
  SwapFlows flows = flow_for_swap(scene.model, scene.source_params,
                                  scene.reference_params, 96, 96);
  TransformFlow grid = mesh_grid(96, 96);
  for (int y = 0; y < 96; ++y) {
    for (int x = 0; x < 96; ++x) {
      const size_t p = flows.head_flow.pixel(y, x);
      const bool head = flows.head_silhouette.mask[p] != 0;
      CHECK((flows.head_flow.valid[p] != 0) == head);
      if (head) {
        CHECK(flows.head_flow.u(y, x) == grid.u(y, x));
        CHECK(flows.head_flow.v(y, x) == grid.v(y, x));
      } else {
        CHECK(flows.head_flow.u(y, x) == kInvalidFlow);
      }
    }
  }
}

TEST_CASE("flow_for_swap: self-swap body flow is the identity on the body silhouette") {
  SyntheticScene scene = make_synthetic_scene(0);
  SwapFlows flows = flow_for_swap(scene.model, scene.source_params,
                                  scene.source_params, 96, 96);
  TransformFlow grid = mesh_grid(96, 96);
  Silhouette body = silhouette(flows.source_body_map);
  int covered = 0;
  for (int y = 0; y < 96; ++y)
    for (int x = 0; x < 96; ++x) {
      const size_t p = flows.body_flow.pixel(y, x);
      CHECK((flows.body_flow.valid[p] != 0) == (body.mask[p] != 0));
      if (flows.body_flow.valid[p]) {
        ++covered;
        CHECK(std::abs(flows.body_flow.u(y, x) - grid.u(y, x)) < 1e-4);
        CHECK(std::abs(flows.body_flow.v(y, x) - grid.v(y, x)) < 1e-4);
      }
    }
  CHECK(covered > 500);
}

TEST_CASE("flow_for_swap: valid sets overlap exactly on the silhouette intersection") {
  SyntheticScene scene = make_synthetic_scene(0);
  SwapFlows flows = flow_for_swap(scene.model, scene.source_params,
                                  scene.reference_params, 96, 96);
  Silhouette body = silhouette(flows.source_body_map);
  for (size_t p = 0; p < body.mask.size(); ++p) {
    const bool both = flows.head_flow.valid[p] && flows.body_flow.valid[p];
    const bool expect = flows.head_silhouette.mask[p] && body.mask[p];
    CHECK(both == expect);
  }
}

TEST_CASE("flow_for_swap requires head and body groups") {
  SyntheticScene scene = make_synthetic_scene(0);
  BodyModel stripped = scene.model;
  stripped.vertex_groups.erase("head");
  CHECK_THROWS_AS(flow_for_swap(stripped, scene.source_params,
                                scene.reference_params, 32, 32),
                  ValidationError);
}

TEST_CASE("source_occlusion_mask: self-correspondence has no occlusions") {
  SyntheticScene scene = make_synthetic_scene(0);
  FlowBundle bundle = flow_for_imitation(scene.model, scene.source_params,
                                         scene.source_params, 64, 64);
  Silhouette occ =
      source_occlusion_mask(bundle.source_map, bundle.target_map, bundle.flow);
  for (uint8_t v : occ.mask) CHECK(v == 0);
}
