#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "gspose/gaussian_model.hpp"
#include "gspose/geometry.hpp"
#include "gspose/image.hpp"

namespace gspose {

/// Forward 3D Gaussian splatting under a pinhole camera, plus the backward
/// pass propagating an image gradient to the world-frame means and from
/// there to a pose delta.
///
/// The rasterizer works on 16x16 pixel tiles with per-tile depth-sorted
/// Gaussian lists; a naive full-scan path over the same sorted order is kept
/// as the correctness oracle and must match the tiled path bitwise.

struct RenderOptions {
  Vec3 background = Vec3::Zero();
  double z_near = 0.01;   // meters
  int threads = 0;        // 0 = hardware concurrency
  bool naive = false;     // full-scan reference path
};

struct RenderedImage {
  Image rgb;    // H x W x 3 in [0,1]
  Image alpha;  // H x W x 1 in [0,1]
};

/// Per-retained-Gaussian state captured by the forward pass.
struct SplatRecord {
  Vec2 center;        // projected mean, pixels
  double conic[3];    // inverse 2D covariance (a, b, c) of [[a,b],[b,c]]
  double depth;       // camera-frame z, meters
  Vec3 color;         // decoded SH color, clamped to [0,1]
  double opacity;
  Vec3 cam_mean;      // camera-frame mean
  double vrk[6];      // camera-rotated 3D covariance: xx, xy, xz, yy, yz, zz
  double radius;      // pixel-space support radius
  int index;          // primitive index in the source object
};

/// Everything needed to replay compositing in reverse.
struct RenderSaved {
  int width = 0, height = 0;
  CameraIntrinsics intrinsics;
  Mat3 cam_rotation;
  Vec3 background;
  std::vector<SplatRecord> splats;        // retained Gaussians
  std::vector<int> point_list;            // per-tile depth-sorted splat indices
  std::vector<std::pair<int, int>> tile_ranges;  // [start, end) into point_list
  int tile_size = 16;
  int tiles_x = 0, tiles_y = 0;
  std::vector<double> final_transmittance;  // per pixel
  std::vector<int> contrib_count;           // per pixel, list positions composited
  std::size_t num_primitives = 0;
  int threads = 0;
};

/// Sigma = R(r) diag(s)^2 R(r)^T. Symmetric positive definite for s > 0.
Mat3 compute_cov3d(const Vec4& r, const Vec3& s);

struct ProjectedGaussian {
  Vec2 center;   // pixels
  Mat2 cov2d;    // pixels^2, includes the +0.3 low-pass dilation
  double depth;  // meters
};

/// EWA projection of one Gaussian. Returns nullopt when the camera-frame
/// depth is at or behind z_near (culled).
std::optional<ProjectedGaussian> project_gaussian(const Vec3& mean, const Mat3& cov3d,
                                                  const SE3Pose& pose,
                                                  const CameraIntrinsics& k,
                                                  double z_near = 0.01);

/// Real spherical harmonics color decode: basis up to the degree implied by
/// the coefficient count (B in {1,4,9,16}) dotted with coeffs per channel,
/// plus 0.5, clamped below at zero. coeffs is channel-major, 3 x B.
Vec3 eval_sh(const std::vector<double>& coeffs, int basis, const Vec3& dir);

/// Front-to-back alpha compositing over an opaque background:
///   alpha'_i = min(0.99, alpha_i * exp(-1/2 d^T cov2d^-1 d))
/// contributions with alpha' < 1/255 are skipped and accumulation stops when
/// transmittance would drop below 1e-4. Deterministic for any thread count.
std::pair<RenderedImage, RenderSaved> render(const GaussianObject& obj, const SE3Pose& pose,
                                             const CameraIntrinsics& k,
                                             const RenderOptions& opts = {});

/// Reverse-order compositing replay: propagates d_image (dL/d rgb, H x W x 3)
/// to the world-frame means of the rendered object (U x 3). The SH
/// view-direction path is excluded (exactly zero for degree-0 objects).
std::vector<Vec3> render_backward(const RenderSaved& saved, const Image& d_image);

/// Chain rule through mu_w = R(q/|q|) mu + t for an object pre-transformed by
/// delta: dt = sum of d_means, dq via the rotation and normalization
/// Jacobians. d_means must come from render_backward of that transformed
/// object; obj is the untransformed source.
std::pair<Vec4, Vec3> pose_gradient(const std::vector<Vec3>& d_means,
                                    const GaussianObject& obj,
                                    const TransformParams& delta);

}  // namespace gspose
