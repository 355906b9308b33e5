#pragma once

#include <string>

#include "gspose/geometry.hpp"

namespace gspose {

/// Pose JSON: {"R": 3x3 row-major array of arrays, "t": 3-array,
/// "units": "m" (optional, default)}.
SE3Pose load_pose_json(const std::string& path);
void save_pose_json(const SE3Pose& pose, const std::string& path);

/// Intrinsics JSON: {"fx","fy","cx","cy","width","height"}.
CameraIntrinsics load_intrinsics_json(const std::string& path);
void save_intrinsics_json(const CameraIntrinsics& k, const std::string& path);

}  // namespace gspose
