// Binary little-endian splat PLY reader/writer. Field semantics follow the
// common 3DGS convention: log scales, logit opacities, f_rest channel-major.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gspose/gaussian_model.hpp"

namespace gspose {
namespace {

struct PlyProperty {
  std::string name;
  int byte_size = 4;
  bool is_float = false;
};

struct PlyHeader {
  std::size_t vertex_count = 0;
  std::vector<PlyProperty> properties;  // of the vertex element
  std::size_t stride = 0;
};

int type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" ||
      t == "float32")
    return 4;
  if (t == "double" || t == "float64" || t == "int64" || t == "uint64") return 8;
  throw std::runtime_error("malformed splat PLY: unknown property type " + t);
}

PlyHeader read_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.substr(0, 3) != "ply")
    throw std::runtime_error("malformed splat PLY: missing magic");

  PlyHeader h;
  bool in_vertex = false;
  bool format_ok = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "comment") continue;
    if (tok == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt != "binary_little_endian")
        throw std::runtime_error("malformed splat PLY: expected binary_little_endian");
      format_ok = true;
    } else if (tok == "element") {
      std::string name;
      std::size_t count;
      ss >> name >> count;
      in_vertex = (name == "vertex");
      if (in_vertex) h.vertex_count = count;
      else if (h.properties.empty())
        in_vertex = false;
    } else if (tok == "property") {
      std::string type, name;
      ss >> type >> name;
      if (type == "list") throw std::runtime_error("malformed splat PLY: list property");
      if (in_vertex) {
        PlyProperty p;
        p.name = name;
        p.byte_size = type_size(type);
        p.is_float = (type == "float" || type == "float32");
        h.properties.push_back(p);
      }
    } else if (tok == "end_header") {
      if (!format_ok) throw std::runtime_error("malformed splat PLY: missing format");
      for (const auto& p : h.properties) h.stride += p.byte_size;
      if (h.properties.empty())
        throw std::runtime_error("malformed splat PLY: missing vertex element");
      return h;
    }
  }
  throw std::runtime_error("malformed splat PLY: truncated header");
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

GaussianObject load_gaussian_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  const PlyHeader h = read_header(in);
  if (h.vertex_count == 0) throw std::runtime_error("empty object");

  std::map<std::string, std::size_t> offset;  // byte offset of each float property
  std::size_t off = 0;
  for (const auto& p : h.properties) {
    if (p.is_float) offset[p.name] = off;
    off += p.byte_size;
  }

  auto require = [&](const std::string& name) {
    auto it = offset.find(name);
    if (it == offset.end())
      throw std::runtime_error("malformed splat PLY: missing " + name);
    return it->second;
  };

  // infer sh degree from the number of f_rest properties
  int n_rest = 0;
  while (offset.count("f_rest_" + std::to_string(n_rest))) ++n_rest;
  if (n_rest % 3 != 0)
    throw std::runtime_error("malformed splat PLY: f_rest count not divisible by 3");
  const int b = n_rest / 3 + 1;
  int degree = -1;
  for (int d = 0; d <= 3; ++d)
    if ((d + 1) * (d + 1) == b) degree = d;
  if (degree < 0) throw std::runtime_error("malformed splat PLY: unsupported f_rest count");

  std::vector<std::size_t> prop_off;
  prop_off.push_back(require("x"));
  prop_off.push_back(require("y"));
  prop_off.push_back(require("z"));
  for (int c = 0; c < 3; ++c) prop_off.push_back(require("f_dc_" + std::to_string(c)));
  for (int k = 0; k < n_rest; ++k) prop_off.push_back(require("f_rest_" + std::to_string(k)));
  prop_off.push_back(require("opacity"));
  for (int c = 0; c < 3; ++c) prop_off.push_back(require("scale_" + std::to_string(c)));
  for (int c = 0; c < 4; ++c) prop_off.push_back(require("rot_" + std::to_string(c)));

  GaussianObject obj;
  obj.sh_degree = degree;
  obj.means.resize(h.vertex_count);
  obj.orientations.resize(h.vertex_count);
  obj.scales.resize(h.vertex_count);
  obj.opacities.resize(h.vertex_count);
  obj.sh_coeffs.resize(h.vertex_count * 3 * b, 0.0);

  std::vector<char> row(h.stride);
  auto fval = [&](std::size_t o) {
    float f;
    std::memcpy(&f, row.data() + o, 4);
    return static_cast<double>(f);
  };

  for (std::size_t i = 0; i < h.vertex_count; ++i) {
    in.read(row.data(), static_cast<std::streamsize>(h.stride));
    if (!in) throw std::runtime_error("malformed splat PLY: truncated data");
    std::size_t p = 0;
    std::vector<double> v(prop_off.size());
    for (std::size_t j = 0; j < prop_off.size(); ++j) {
      v[j] = fval(prop_off[j]);
      if (!std::isfinite(v[j])) throw std::runtime_error("non-finite field");
    }
    obj.means[i] = Vec3{v[p], v[p + 1], v[p + 2]};
    p += 3;
    for (int ch = 0; ch < 3; ++ch) obj.sh(i, ch, 0) = v[p + ch];
    p += 3;
    // f_rest channel-major: all remaining basis coeffs of channel 0, then 1, then 2
    for (int ch = 0; ch < 3; ++ch)
      for (int k = 1; k < b; ++k) obj.sh(i, ch, k) = v[p + ch * (b - 1) + (k - 1)];
    p += static_cast<std::size_t>(n_rest);
    obj.opacities[i] = logistic(v[p]);
    p += 1;
    obj.scales[i] = Vec3{std::exp(v[p]), std::exp(v[p + 1]), std::exp(v[p + 2])};
    p += 3;
    Vec4 q{v[p], v[p + 1], v[p + 2], v[p + 3]};
    const double n = q.norm();
    if (n <= 1e-12) throw std::runtime_error("non-finite field");
    obj.orientations[i] = q / n;
  }

  obj.diameter = h.vertex_count >= 2 ? object_diameter(obj.means) : 0.0;
  return obj;
}

void save_gaussian_ply(const GaussianObject& obj, const std::string& path) {
  if (obj.size() == 0) throw std::runtime_error("empty object");
  const int b = obj.basis_count();
  const int n_rest = 3 * (b - 1);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);

  out << "ply\nformat binary_little_endian 1.0\n";
  out << "element vertex " << obj.size() << "\n";
  const char* base[] = {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"};
  for (const char* name : base) out << "property float " << name << "\n";
  for (int k = 0; k < n_rest; ++k) out << "property float f_rest_" << k << "\n";
  out << "property float opacity\n";
  for (int c = 0; c < 3; ++c) out << "property float scale_" << c << "\n";
  for (int c = 0; c < 4; ++c) out << "property float rot_" << c << "\n";
  out << "end_header\n";

  std::vector<float> row(9 + n_rest + 1 + 3 + 4);
  for (std::size_t i = 0; i < obj.size(); ++i) {
    std::size_t p = 0;
    for (int c = 0; c < 3; ++c) row[p++] = static_cast<float>(obj.means[i][c]);
    for (int c = 0; c < 3; ++c) row[p++] = 0.0f;  // normals, unused
    for (int ch = 0; ch < 3; ++ch) row[p++] = static_cast<float>(obj.sh(i, ch, 0));
    for (int ch = 0; ch < 3; ++ch)
      for (int k = 1; k < b; ++k) row[p++] = static_cast<float>(obj.sh(i, ch, k));
    const double a = std::min(std::max(obj.opacities[i], 1e-6), 1.0 - 1e-6);
    row[p++] = static_cast<float>(std::log(a / (1.0 - a)));
    for (int c = 0; c < 3; ++c) row[p++] = static_cast<float>(std::log(obj.scales[i][c]));
    for (int c = 0; c < 4; ++c) row[p++] = static_cast<float>(obj.orientations[i][c]);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("I/O error writing " + path);
}

std::vector<Vec3> load_ply_points(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  const PlyHeader h = read_header(in);

  std::size_t off = 0;
  std::size_t ox = static_cast<std::size_t>(-1), oy = ox, oz = ox;
  for (const auto& p : h.properties) {
    if (p.is_float && p.name == "x") ox = off;
    if (p.is_float && p.name == "y") oy = off;
    if (p.is_float && p.name == "z") oz = off;
    off += p.byte_size;
  }
  if (ox == static_cast<std::size_t>(-1) || oy == static_cast<std::size_t>(-1) ||
      oz == static_cast<std::size_t>(-1))
    throw std::runtime_error("malformed splat PLY: missing x");

  std::vector<Vec3> pts(h.vertex_count);
  std::vector<char> row(h.stride);
  for (std::size_t i = 0; i < h.vertex_count; ++i) {
    in.read(row.data(), static_cast<std::streamsize>(h.stride));
    if (!in) throw std::runtime_error("malformed splat PLY: truncated data");
    float f[3];
    std::memcpy(&f[0], row.data() + ox, 4);
    std::memcpy(&f[1], row.data() + oy, 4);
    std::memcpy(&f[2], row.data() + oz, 4);
    pts[i] = Vec3{f[0], f[1], f[2]};
  }
  return pts;
}

}  // namespace gspose
