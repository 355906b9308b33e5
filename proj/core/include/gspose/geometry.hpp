#pragma once

#include <Eigen/Core>
#include <vector>

namespace gspose {

using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;

/// Rigid world-to-camera pose: x_cam = rotation * x_world + translation.
/// Translations are in scene length units (meters by convention).
struct SE3Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Mat4 matrix() const;
  static SE3Pose from_matrix(const Mat4& m);
  SE3Pose inverse() const;
  /// Camera center in world coordinates, -R^T t.
  Vec3 camera_center() const;
};

/// Optimizable pose delta: unnormalized quaternion (w first) plus translation.
/// The quaternion is normalized at matrix formation, never in place.
struct TransformParams {
  Vec4 q{1.0, 0.0, 0.0, 0.0};
  Vec3 t = Vec3::Zero();
};

/// Pinhole parameters. For crops these describe the virtual camera of the
/// resampled region.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;
};

/// True when m^T m = I and det(m) = +1, both within tol.
bool is_rotation_matrix(const Mat3& m, double tol = 1e-9);

/// Rotation matrix of the normalized quaternion (w first).
/// Throws std::invalid_argument("degenerate quaternion") when ||q|| <= 1e-12.
Mat3 quat_to_rotation(const Vec4& q);

/// Hamilton product a*b, both w-first.
Vec4 quat_multiply(const Vec4& a, const Vec4& b);

/// Rotation angle between two rotations: arccos((trace(a b^T) - 1) / 2),
/// argument clamped to [-1, 1]. Result in [0, pi].
double geodesic_distance(const Mat3& a, const Mat3& b);

/// Homogeneous product p_init * delta expressed as a pose.
SE3Pose compose_pose(const SE3Pose& p_init, const TransformParams& delta);

/// Pinhole projection of a world point. Throws std::domain_error
/// ("point behind camera") when the camera-frame depth is <= 0.
Vec2 project_point(const Vec3& x, const SE3Pose& pose, const CameraIntrinsics& k);

/// Intrinsics of the virtual camera viewing the square crop of side
/// box_scale centered at `center`, resampled to out_size x out_size:
///   f' = f * out_size / box_scale
///   c' = (c - center + box_scale/2) * out_size / box_scale
CameraIntrinsics crop_intrinsics(const CameraIntrinsics& k, const Vec2& center,
                                 double box_scale, int out_size);

/// Greedy farthest point sampling over rotations under the geodesic metric.
/// Seeds at index 0; each round adds the index maximizing the minimum
/// distance to the selected set, ties broken by lowest index. Returns n_k
/// distinct indices in selection order.
std::vector<int> fps_select(const std::vector<Mat3>& rotations, int n_k);

}  // namespace gspose
