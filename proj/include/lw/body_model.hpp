#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "lw/errors.hpp"

namespace lw {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using MatX = Eigen::MatrixXd;

// Weak-perspective camera: uniform scale plus 2D offset in normalized image
// coordinates (pixel centers span [-1, 1], align-corners).
struct Camera {
  double scale = 1.0;
  double tx = 0.0;
  double ty = 0.0;

  void validate() const;
};

struct Mesh {
  MatX vertices;          // Nv x 3
  Eigen::MatrixXi faces;  // Nf x 3

  Vec3 centroid() const { return vertices.colwise().mean().transpose(); }
};

// Generic SMPL-style parametric body: template + shape blendshapes,
// regressed joints articulated by forward kinematics, linear blend skinning.
struct BodyModel {
  MatX template_vertices;               // Nv x 3
  Eigen::MatrixXi faces;                // Nf x 3
  std::vector<MatX> shape_blendshapes;  // Nb entries, each Nv x 3
  MatX joint_regressor;                 // Nj x Nv
  std::vector<int> kinematic_parents;   // Nj, parents[0] == -1
  MatX skinning_weights;                // Nv x Nj
  std::map<std::string, std::vector<int>> vertex_groups;

  int num_vertices() const { return static_cast<int>(template_vertices.rows()); }
  int num_faces() const { return static_cast<int>(faces.rows()); }
  int num_joints() const { return static_cast<int>(kinematic_parents.size()); }
  int num_shapes() const { return static_cast<int>(shape_blendshapes.size()); }

  // Throws ValidationError when any structural invariant is broken.
  void validate() const;

  const std::vector<int>& group(const std::string& name) const;
};

struct BodyParams {
  std::vector<double> theta;  // 3 * Nj axis-angle radians
  std::vector<double> beta;   // Nb shape coefficients
  Camera camera;

  void validate(const BodyModel& model) const;
};

struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
};

// Axis-angle to rotation matrix; zero vector yields the identity.
Mat3 rodrigues(const Vec3& axis_angle);

// template + sum_i beta_i * blendshape_i
MatX shape_deform(const BodyModel& model, const std::vector<double>& beta);

// Global rigid transform per joint. Joint j's transform is its parent's
// composed with rodrigues(theta_j) pivoting about joint j's rest position
// (joints regressed from the shaped vertices); the root composes from the
// identity, so theta = 0 maps every joint to its rest position.
std::vector<RigidTransform> forward_kinematics(const BodyModel& model,
                                               const MatX& shaped_vertices,
                                               const std::vector<double>& theta);

// Full model evaluation: shape_deform, forward_kinematics, then linear
// blend skinning. theta = 0, beta = 0 reproduces the template exactly.
Mesh skin(const BodyModel& model, const BodyParams& params);

// Sub-mesh of the faces whose three vertices all belong to the group,
// with vertices reindexed.
Mesh submesh(const Mesh& mesh, const std::vector<int>& vertex_ids);

}  // namespace lw
