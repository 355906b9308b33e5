#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gspose/geometry.hpp"

namespace gspose {

/// A 3D Gaussian object: per-primitive mean, orientation, scale, opacity and
/// spherical-harmonic color, plus the object diameter. All stored values are
/// activated (positive scales, opacities in [0,1], unit orientations); the
/// splat-PLY representation stores the inverse activations.
struct GaussianObject {
  std::vector<Vec3> means;          // meters
  std::vector<Vec4> orientations;   // unit quaternions, w first
  std::vector<Vec3> scales;         // meters, positive
  std::vector<double> opacities;    // [0, 1]
  std::vector<double> sh_coeffs;    // size * 3 * basis_count, [i][channel][basis]
  int sh_degree = 0;
  double diameter = 0.0;            // AABB diagonal of the means

  std::size_t size() const { return means.size(); }
  int basis_count() const { return (sh_degree + 1) * (sh_degree + 1); }

  double sh(std::size_t i, int channel, int basis) const {
    return sh_coeffs[(i * 3 + channel) * basis_count() + basis];
  }
  double& sh(std::size_t i, int channel, int basis) {
    return sh_coeffs[(i * 3 + channel) * basis_count() + basis];
  }

  /// Throws std::runtime_error on any invariant violation.
  void validate() const;
};

/// Diagonal length of the axis-aligned bounding box of the means.
/// Throws when fewer than two points are given.
double object_diameter(const std::vector<Vec3>& means);

/// Reads a binary little-endian splat PLY (reference 3DGS layout: x,y,z,
/// f_dc_0..2, f_rest_*, opacity, scale_0..2, rot_0..3; optional normals are
/// skipped). Applies activations: logistic(opacity), exp(scale), normalized
/// orientation. sh_degree is inferred from the f_rest count.
GaussianObject load_gaussian_ply(const std::string& path);

/// Writes the inverse activations in the same layout; load(save(x)) == x
/// within 1e-6 on every activated field. Opacity is clamped to
/// [1e-6, 1 - 1e-6] before the logit.
void save_gaussian_ply(const GaussianObject& obj, const std::string& path);

/// Reads just the x,y,z vertex positions from a binary little-endian PLY.
/// Works on splat PLYs and on plain point-cloud PLYs alike.
std::vector<Vec3> load_ply_points(const std::string& path);

/// Applies the delta transform to every mean: mu <- R(q) mu + t. When
/// transform_covariance is set, orientations are left-multiplied by the
/// delta quaternion as well; all other fields are copied unchanged.
GaussianObject rigid_transform_object(const GaussianObject& obj,
                                      const TransformParams& delta,
                                      bool transform_covariance = false);

/// Deterministic pseudo-random test object: means uniform in a cube of side
/// `extent`, scales in [extent/100, extent/20], opacities in [0.5, 1],
/// distinct SH colors. Same seed, same object.
GaussianObject synth_object(std::uint64_t seed, int count, double extent, int sh_degree);

}  // namespace gspose
