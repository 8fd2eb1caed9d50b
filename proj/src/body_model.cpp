#include "lw/body_model.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace lw {

void Camera::validate() const {
  require(std::isfinite(scale) && std::isfinite(tx) && std::isfinite(ty),
          "camera values must be finite");
  require(scale > 0.0, "camera scale must be > 0");
}

void BodyModel::validate() const {
  const int nv = num_vertices();
  const int nj = num_joints();
  const int nf = num_faces();

  require(nv >= 3, "model needs at least 3 vertices");
  require(nj >= 1, "model needs at least 1 joint");
  require(template_vertices.cols() == 3, "template_vertices must be Nv x 3");
  require(template_vertices.allFinite(), "template_vertices must be finite");

  require(faces.cols() == 3, "faces must be Nf x 3");
  for (int f = 0; f < nf; ++f) {
    int a = faces(f, 0), b = faces(f, 1), c = faces(f, 2);
    require(a >= 0 && a < nv && b >= 0 && b < nv && c >= 0 && c < nv,
            "face index out of range at face " + std::to_string(f));
    require(a != b && b != c && a != c,
            "degenerate face (repeated vertex) at face " + std::to_string(f));
  }

  for (size_t i = 0; i < shape_blendshapes.size(); ++i) {
    require(shape_blendshapes[i].rows() == nv && shape_blendshapes[i].cols() == 3,
            "blendshape " + std::to_string(i) + " must be Nv x 3");
    require(shape_blendshapes[i].allFinite(), "blendshapes must be finite");
  }

  require(joint_regressor.rows() == nj && joint_regressor.cols() == nv,
          "joint_regressor must be Nj x Nv");
  require(joint_regressor.allFinite(), "joint_regressor must be finite");

  require(kinematic_parents[0] == -1, "joint 0 must be the root (parent -1)");
  for (int j = 1; j < nj; ++j) {
    require(kinematic_parents[j] >= 0 && kinematic_parents[j] < j,
            "kinematic_parents must satisfy parent < child (joint " +
                std::to_string(j) + ")");
  }

  require(skinning_weights.rows() == nv && skinning_weights.cols() == nj,
          "skinning_weights must be Nv x Nj");
  for (int v = 0; v < nv; ++v) {
    double sum = 0.0;
    for (int j = 0; j < nj; ++j) {
      double w = skinning_weights(v, j);
      require(std::isfinite(w) && w >= 0.0,
              "skinning weights must be finite and nonnegative");
      sum += w;
    }
    require(std::abs(sum - 1.0) <= 1e-6,
            "skinning weight row " + std::to_string(v) + " sums to " +
                std::to_string(sum) + ", expected 1");
  }

  for (const auto& [name, ids] : vertex_groups) {
    std::set<int> seen;
    for (int id : ids) {
      require(id >= 0 && id < nv,
              "vertex group '" + name + "' references vertex " +
                  std::to_string(id) + " out of range");
      require(seen.insert(id).second,
              "vertex group '" + name + "' repeats vertex " + std::to_string(id));
    }
  }
}

const std::vector<int>& BodyModel::group(const std::string& name) const {
  auto it = vertex_groups.find(name);
  if (it == vertex_groups.end())
    throw ValidationError("model has no vertex group '" + name + "'");
  return it->second;
}

void BodyParams::validate(const BodyModel& model) const {
  require(static_cast<int>(theta.size()) == 3 * model.num_joints(),
          "theta length must be 3 * Nj = " +
              std::to_string(3 * model.num_joints()) + ", got " +
              std::to_string(theta.size()));
  require(static_cast<int>(beta.size()) == model.num_shapes(),
          "beta length must be Nb = " + std::to_string(model.num_shapes()) +
              ", got " + std::to_string(beta.size()));
  for (double t : theta) require(std::isfinite(t), "theta must be finite");
  for (double b : beta) require(std::isfinite(b), "beta must be finite");
  camera.validate();
}

Mat3 rodrigues(const Vec3& axis_angle) {
  double angle = axis_angle.norm();
  if (angle == 0.0) return Mat3::Identity();
  Vec3 axis = axis_angle / angle;
  // R = I + sin(a) K + (1 - cos(a)) K^2, K the cross-product matrix of axis.
  Mat3 k;
  k << 0, -axis.z(), axis.y(),
       axis.z(), 0, -axis.x(),
       -axis.y(), axis.x(), 0;
  return Mat3::Identity() + std::sin(angle) * k +
         (1.0 - std::cos(angle)) * (k * k);
}

MatX shape_deform(const BodyModel& model, const std::vector<double>& beta) {
  require(static_cast<int>(beta.size()) == model.num_shapes(),
          "beta length must equal the number of blendshapes");
  MatX v = model.template_vertices;
  for (size_t i = 0; i < beta.size(); ++i) v += beta[i] * model.shape_blendshapes[i];
  return v;
}

std::vector<RigidTransform> forward_kinematics(
    const BodyModel& model, const MatX& shaped_vertices,
    const std::vector<double>& theta) {
  const int nj = model.num_joints();
  require(static_cast<int>(theta.size()) == 3 * nj,
          "theta length must be 3 * Nj");
  require(shaped_vertices.rows() == model.num_vertices() &&
              shaped_vertices.cols() == 3,
          "shaped_vertices must be Nv x 3");

  MatX rest_joints = model.joint_regressor * shaped_vertices;  // Nj x 3

  std::vector<RigidTransform> global(nj);
  for (int j = 0; j < nj; ++j) {
    Mat3 local = rodrigues(Vec3(theta[3 * j], theta[3 * j + 1], theta[3 * j + 2]));
    Vec3 pivot = rest_joints.row(j).transpose();
    // Local map x -> local * (x - pivot) + pivot, composed onto the parent.
    RigidTransform t;
    t.rotation = local;
    t.translation = pivot - local * pivot;
    if (model.kinematic_parents[j] >= 0) {
      const RigidTransform& p = global[model.kinematic_parents[j]];
      RigidTransform composed;
      composed.rotation = p.rotation * t.rotation;
      composed.translation = p.rotation * t.translation + p.translation;
      global[j] = composed;
    } else {
      global[j] = t;
    }
  }
  return global;
}

Mesh skin(const BodyModel& model, const BodyParams& params) {
  params.validate(model);
  MatX shaped = shape_deform(model, params.beta);
  std::vector<RigidTransform> transforms =
      forward_kinematics(model, shaped, params.theta);

  const int nv = model.num_vertices();
  const int nj = model.num_joints();
  MatX out = MatX::Zero(nv, 3);
  for (int j = 0; j < nj; ++j) {
    // shaped * R^T + t, weighted by this joint's column.
    MatX moved = shaped * transforms[j].rotation.transpose();
    moved.rowwise() += transforms[j].translation.transpose();
    out += model.skinning_weights.col(j).asDiagonal() * moved;
  }

  Mesh mesh;
  mesh.vertices = std::move(out);
  mesh.faces = model.faces;
  return mesh;
}

Mesh submesh(const Mesh& mesh, const std::vector<int>& vertex_ids) {
  const int nv = static_cast<int>(mesh.vertices.rows());
  std::vector<int> remap(nv, -1);
  for (size_t i = 0; i < vertex_ids.size(); ++i) {
    require(vertex_ids[i] >= 0 && vertex_ids[i] < nv,
            "submesh vertex id out of range");
    remap[vertex_ids[i]] = static_cast<int>(i);
  }

  Mesh out;
  out.vertices.resize(static_cast<int>(vertex_ids.size()), 3);
  for (size_t i = 0; i < vertex_ids.size(); ++i)
    out.vertices.row(static_cast<int>(i)) = mesh.vertices.row(vertex_ids[i]);

  std::vector<Eigen::RowVector3i> kept;
  for (int f = 0; f < mesh.faces.rows(); ++f) {
    int a = remap[mesh.faces(f, 0)];
    int b = remap[mesh.faces(f, 1)];
    int c = remap[mesh.faces(f, 2)];
    if (a >= 0 && b >= 0 && c >= 0) kept.push_back({a, b, c});
  }
  out.faces.resize(static_cast<int>(kept.size()), 3);
  for (size_t f = 0; f < kept.size(); ++f) out.faces.row(static_cast<int>(f)) = kept[f];
  return out;
}

}  // namespace lw
