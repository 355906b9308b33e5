#include "gspose/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gspose {

Mat4 SE3Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.block<3, 3>(0, 0) = rotation;
  m.block<3, 1>(0, 3) = translation;
  return m;
}

SE3Pose SE3Pose::from_matrix(const Mat4& m) {
  SE3Pose p;
  p.rotation = m.block<3, 3>(0, 0);
  p.translation = m.block<3, 1>(0, 3);
  return p;
}

SE3Pose SE3Pose::inverse() const {
  SE3Pose p;
  p.rotation = rotation.transpose();
  p.translation = -(rotation.transpose() * translation);
  return p;
}

Vec3 SE3Pose::camera_center() const { return -(rotation.transpose() * translation); }

bool is_rotation_matrix(const Mat3& m, double tol) {
  const Mat3 err = m.transpose() * m - Mat3::Identity();
  if (err.cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(m.determinant() - 1.0) <= tol;
}

Mat3 quat_to_rotation(const Vec4& q) {
  const double n = q.norm();
  if (n <= 1e-12) throw std::invalid_argument("degenerate quaternion");
  const double w = q[0] / n, x = q[1] / n, y = q[2] / n, z = q[3] / n;
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

Vec4 quat_multiply(const Vec4& a, const Vec4& b) {
  return Vec4{a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
              a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
              a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
              a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]};
}

double geodesic_distance(const Mat3& a, const Mat3& b) {
  const double t = (a * b.transpose()).trace();
  const double c = std::clamp((t - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

SE3Pose compose_pose(const SE3Pose& p_init, const TransformParams& delta) {
  const Mat3 rd = quat_to_rotation(delta.q);
  SE3Pose out;
  out.rotation = p_init.rotation * rd;
  out.translation = p_init.rotation * delta.t + p_init.translation;
  return out;
}

Vec2 project_point(const Vec3& x, const SE3Pose& pose, const CameraIntrinsics& k) {
  const Vec3 c = pose.rotation * x + pose.translation;
  if (c.z() <= 0.0) throw std::domain_error("point behind camera");
  return Vec2{k.fx * c.x() / c.z() + k.cx, k.fy * c.y() / c.z() + k.cy};
}

CameraIntrinsics crop_intrinsics(const CameraIntrinsics& k, const Vec2& center,
                                 double box_scale, int out_size) {
  if (box_scale <= 0.0) throw std::invalid_argument("box_scale must be positive");
  if (out_size <= 0) throw std::invalid_argument("out_size must be positive");
  const double s = static_cast<double>(out_size) / box_scale;
  CameraIntrinsics c;
  c.fx = k.fx * s;
  c.fy = k.fy * s;
  c.cx = (k.cx - center.x() + box_scale / 2.0) * s;
  c.cy = (k.cy - center.y() + box_scale / 2.0) * s;
  c.width = out_size;
  c.height = out_size;
  return c;
}

std::vector<int> fps_select(const std::vector<Mat3>& rotations, int n_k) {
  const int n = static_cast<int>(rotations.size());
  if (n_k < 1 || n_k > n) throw std::invalid_argument("fps_select: n_k out of range");

  std::vector<int> selected;
  selected.reserve(n_k);
  selected.push_back(0);

  // min distance from each candidate to the selected set
  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  for (int round = 1; round < n_k; ++round) {
    const Mat3& last = rotations[selected.back()];
    int best = -1;
    double best_dist = -1.0;
    for (int i = 0; i < n; ++i) {
      min_dist[i] = std::min(min_dist[i], geodesic_distance(rotations[i], last));
      if (min_dist[i] > best_dist) {
        best_dist = min_dist[i];
        best = i;
      }
    }
    selected.push_back(best);
    min_dist[best] = -1.0;  // never reselected
  }
  return selected;
}

}  // namespace gspose
