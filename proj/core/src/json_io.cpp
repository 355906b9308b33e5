#include "gspose/json_io.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace gspose {

using nlohmann::json;

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace

SE3Pose load_pose_json(const std::string& path) {
  const json j = read_json_file(path);
  if (!j.contains("R") || !j.contains("t")) throw std::runtime_error("pose JSON: missing R or t");
  SE3Pose p;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) p.rotation(r, c) = j["R"].at(r).at(c).get<double>();
  for (int c = 0; c < 3; ++c) p.translation[c] = j["t"].at(c).get<double>();
  if (j.contains("units") && j["units"].get<std::string>() != "m")
    throw std::runtime_error("pose JSON: unsupported units");
  if (!is_rotation_matrix(p.rotation, 1e-6))
    throw std::runtime_error("pose JSON: R is not a rotation matrix");
  return p;
}

void save_pose_json(const SE3Pose& pose, const std::string& path) {
  json j;
  for (int r = 0; r < 3; ++r) {
    json row = json::array();
    for (int c = 0; c < 3; ++c) row.push_back(pose.rotation(r, c));
    j["R"].push_back(row);
  }
  j["t"] = {pose.translation[0], pose.translation[1], pose.translation[2]};
  j["units"] = "m";
  write_json_file(j, path);
}

CameraIntrinsics load_intrinsics_json(const std::string& path) {
  const json j = read_json_file(path);
  CameraIntrinsics k;
  try {
    k.fx = j.at("fx").get<double>();
    k.fy = j.at("fy").get<double>();
    k.cx = j.at("cx").get<double>();
    k.cy = j.at("cy").get<double>();
    k.width = j.at("width").get<int>();
    k.height = j.at("height").get<int>();
  } catch (const json::exception&) {
    throw std::runtime_error("intrinsics JSON: missing field");
  }
  if (k.fx <= 0 || k.fy <= 0 || k.width <= 0 || k.height <= 0)
    throw std::runtime_error("intrinsics JSON: invalid values");
  return k;
}

void save_intrinsics_json(const CameraIntrinsics& k, const std::string& path) {
  json j;
  j["fx"] = k.fx;
  j["fy"] = k.fy;
  j["cx"] = k.cx;
  j["cy"] = k.cy;
  j["width"] = k.width;
  j["height"] = k.height;
  write_json_file(j, path);
}

}  // namespace gspose
