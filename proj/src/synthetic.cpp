#include "lw/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "lw/raster.hpp"

namespace lw {

namespace {

constexpr int kRings = 4;
constexpr int kSegments = 7;

struct Builder {
  std::vector<Vec3> vertices;
  std::vector<Eigen::RowVector3i> faces;
  std::vector<int> joint_of_vertex;

  // Capsule from p0 to p1 (cylinder with cone caps). Returns the vertex ids
  // of the ring nearest p0, used to regress the joint pivot.
  std::vector<int> add_capsule(const Vec3& p0, const Vec3& p1, double radius,
                               int joint) {
    const Vec3 axis = (p1 - p0).normalized();
    Vec3 up = std::abs(axis.z()) < 0.9 ? Vec3(0, 0, 1) : Vec3(1, 0, 0);
    const Vec3 u = axis.cross(up).normalized();
    const Vec3 w = axis.cross(u);

    const int base = static_cast<int>(vertices.size());
    std::vector<int> pivot_ring;
    for (int r = 0; r < kRings; ++r) {
      const double t = static_cast<double>(r) / (kRings - 1);
      const Vec3 center = p0 + t * (p1 - p0);
      for (int s = 0; s < kSegments; ++s) {
        const double phi = 2.0 * std::numbers::pi * s / kSegments;
        vertices.push_back(center + radius * (std::cos(phi) * u + std::sin(phi) * w));
        joint_of_vertex.push_back(joint);
        if (r == 0) pivot_ring.push_back(static_cast<int>(vertices.size()) - 1);
      }
    }
    const int bottom = static_cast<int>(vertices.size());
    vertices.push_back(p0 - radius * axis);
    joint_of_vertex.push_back(joint);
    const int top = static_cast<int>(vertices.size());
    vertices.push_back(p1 + radius * axis);
    joint_of_vertex.push_back(joint);

    auto ring = [&](int r, int s) { return base + r * kSegments + (s % kSegments); };
    for (int r = 0; r + 1 < kRings; ++r) {
      for (int s = 0; s < kSegments; ++s) {
        faces.push_back({ring(r, s), ring(r, s + 1), ring(r + 1, s)});
        faces.push_back({ring(r, s + 1), ring(r + 1, s + 1), ring(r + 1, s)});
      }
    }
    for (int s = 0; s < kSegments; ++s) {
      faces.push_back({bottom, ring(0, s + 1), ring(0, s)});
      faces.push_back({top, ring(kRings - 1, s), ring(kRings - 1, s + 1)});
    }
    return pivot_ring;
  }
};

}  // namespace

SyntheticScene make_synthetic_scene(uint64_t seed) {
  Builder b;

  auto torso_ring = b.add_capsule({0, -0.15, 0}, {0, 0.45, 0}, 0.16,
                                  static_cast<int>(SyntheticJoint::kRoot));
  auto larm_ring = b.add_capsule({-0.24, 0.38, 0}, {-0.58, 0.38, 0}, 0.07,
                                 static_cast<int>(SyntheticJoint::kLeftArm));
  auto rarm_ring = b.add_capsule({0.24, 0.38, 0}, {0.58, 0.38, 0}, 0.07,
                                 static_cast<int>(SyntheticJoint::kRightArm));
  auto lleg_ring = b.add_capsule({-0.095, -0.20, 0}, {-0.095, -0.85, 0}, 0.075,
                                 static_cast<int>(SyntheticJoint::kLeftLeg));
  auto rleg_ring = b.add_capsule({0.095, -0.20, 0}, {0.095, -0.85, 0}, 0.075,
                                 static_cast<int>(SyntheticJoint::kRightLeg));
  // Separate component with a visible neck gap so head and body silhouettes
  // stay disjoint in the rest pose.
  auto head_ring = b.add_capsule({0, 0.76, 0}, {0, 0.88, 0}, 0.095,
                                 static_cast<int>(SyntheticJoint::kHead));

  const int nv = static_cast<int>(b.vertices.size());
  const int nj = 6;

  BodyModel model;
  model.template_vertices.resize(nv, 3);
  for (int v = 0; v < nv; ++v) model.template_vertices.row(v) = b.vertices[v].transpose();

  model.faces.resize(static_cast<int>(b.faces.size()), 3);
  for (size_t f = 0; f < b.faces.size(); ++f)
    model.faces.row(static_cast<int>(f)) = b.faces[f];

  model.kinematic_parents = {-1, 0, 0, 0, 0, 0};

  model.joint_regressor = MatX::Zero(nj, nv);
  auto set_ring = [&](SyntheticJoint joint, const std::vector<int>& ring) {
    for (int id : ring)
      model.joint_regressor(static_cast<int>(joint), id) = 1.0 / ring.size();
  };
  set_ring(SyntheticJoint::kRoot, torso_ring);
  set_ring(SyntheticJoint::kLeftArm, larm_ring);
  set_ring(SyntheticJoint::kRightArm, rarm_ring);
  set_ring(SyntheticJoint::kLeftLeg, lleg_ring);
  set_ring(SyntheticJoint::kRightLeg, rleg_ring);
  set_ring(SyntheticJoint::kHead, head_ring);

  model.skinning_weights = MatX::Zero(nv, nj);
  for (int v = 0; v < nv; ++v) model.skinning_weights(v, b.joint_of_vertex[v]) = 1.0;

  // Blendshape 0 scales height, blendshape 1 scales girth.
  MatX height = MatX::Zero(nv, 3);
  MatX width = MatX::Zero(nv, 3);
  for (int v = 0; v < nv; ++v) {
    height(v, 1) = 0.35 * model.template_vertices(v, 1);
    width(v, 0) = 0.25 * model.template_vertices(v, 0);
    width(v, 2) = 0.25 * model.template_vertices(v, 2);
  }
  model.shape_blendshapes = {height, width};

  std::vector<int> head_ids, body_ids;
  for (int v = 0; v < nv; ++v) {
    if (b.joint_of_vertex[v] == static_cast<int>(SyntheticJoint::kHead))
      head_ids.push_back(v);
    else
      body_ids.push_back(v);
  }
  model.vertex_groups["head"] = head_ids;
  model.vertex_groups["body"] = body_ids;

  model.validate();

  std::mt19937_64 rng(seed);
  auto jitter = [&rng](double scale) {
    return (static_cast<double>(rng() >> 11) / 9007199254740992.0 * 2.0 - 1.0) * scale;
  };

  SyntheticScene scene;
  scene.model = std::move(model);
  scene.source_params.theta.assign(3 * nj, 0.0);
  scene.source_params.beta.assign(2, 0.0);
  scene.source_params.camera = {0.9 + jitter(0.05), jitter(0.02), jitter(0.02)};

  scene.reference_params = scene.source_params;
  // Raise the left arm 90 degrees about z, swing the right leg, tilt the head.
  scene.reference_params.theta[3 * static_cast<int>(SyntheticJoint::kLeftArm) + 2] =
      std::numbers::pi / 2 + jitter(0.1);
  scene.reference_params.theta[3 * static_cast<int>(SyntheticJoint::kRightLeg) + 0] =
      0.5 + jitter(0.1);
  scene.reference_params.theta[3 * static_cast<int>(SyntheticJoint::kHead) + 2] =
      0.2 + jitter(0.05);
  return scene;
}

namespace {

// Checkerboard anchored to the template surface with one tint band per
// dominant joint; background is a horizontal gradient.
void shade(const Vec3& rest_pos, int joint, float rgb[3]) {
  const int cx = static_cast<int>(std::floor(rest_pos.x() * 8.0));
  const int cy = static_cast<int>(std::floor(rest_pos.y() * 8.0));
  const int cz = static_cast<int>(std::floor(rest_pos.z() * 8.0));
  const bool on = ((cx + cy + cz) & 1) != 0;

  static const float tints[6][3] = {
      {0.9f, 0.3f, 0.3f},  // torso
      {0.3f, 0.9f, 0.3f},  // left arm
      {0.3f, 0.3f, 0.9f},  // right arm
      {0.9f, 0.9f, 0.3f},  // left leg
      {0.3f, 0.9f, 0.9f},  // right leg
      {0.9f, 0.5f, 0.2f},  // head
  };
  for (int c = 0; c < 3; ++c) {
    const float base = tints[joint][c];
    const float v = on ? base : base * 0.35f;
    rgb[c] = 2.0f * v - 1.0f;
  }
}

}  // namespace

FeatureMap render_body_image(const BodyModel& model, const BodyParams& params,
                             int width, int height, int threads) {
  Mesh posed = skin(model, params);
  CorrespondenceMap cmap =
      rasterize(project(posed, params.camera), width, height, threads);

  FeatureMap img(3, height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const size_t p = cmap.pixel(y, x);
      const int32_t f = cmap.face_index[p];
      if (f == kEmptyPixel) {
        const float g = -0.8f + 0.25f * static_cast<float>(x) / std::max(1, width - 1);
        img.at(0, y, x) = g;
        img.at(1, y, x) = g + 0.05f;
        img.at(2, y, x) = g + 0.12f;
        continue;
      }
      const int i0 = model.faces(f, 0), i1 = model.faces(f, 1), i2 = model.faces(f, 2);
      const double w0 = cmap.bary[3 * p + 0];
      const double w1 = cmap.bary[3 * p + 1];
      const double w2 = cmap.bary[3 * p + 2];
      const Vec3 rest = w0 * model.template_vertices.row(i0).transpose() +
                        w1 * model.template_vertices.row(i1).transpose() +
                        w2 * model.template_vertices.row(i2).transpose();
      int joint = 0;
      double best = -1.0;
      for (int j = 0; j < model.num_joints(); ++j) {
        const double w = model.skinning_weights(i0, j);
        if (w > best) {
          best = w;
          joint = j;
        }
      }
      float rgb[3];
      shade(rest, joint, rgb);
      img.at(0, y, x) = rgb[0];
      img.at(1, y, x) = rgb[1];
      img.at(2, y, x) = rgb[2];
    }
  }
  return img;
}

}  // namespace lw
