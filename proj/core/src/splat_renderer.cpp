#include "gspose/splat_renderer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gspose/parallel.hpp"

namespace gspose {
namespace {

constexpr double kAlphaCap = 0.99;
constexpr double kAlphaSkip = 1.0 / 255.0;
constexpr double kTransmitStop = 1e-4;
constexpr double kCovDilation = 0.3;
constexpr int kTileSize = 16;

// real SH basis values up to degree 3, reference 3DGS sign convention
constexpr double kSH0 = 0.28209479177387814;
constexpr double kSH1 = 0.4886025119029199;
constexpr double kSH2[5] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                            -1.0925484305920792, 0.5462742152960396};
constexpr double kSH3[7] = {-0.5900435899266435, 2.890611442640554, -0.4570457994644658,
                            0.3731763325901154,  -0.4570457994644658, 2.890611442640554,
                            -0.5900435899266435};

void sh_basis(int basis, const Vec3& dir, double* f) {
  const double x = dir.x(), y = dir.y(), z = dir.z();
  f[0] = kSH0;
  if (basis < 4) return;
  f[1] = -kSH1 * y;
  f[2] = kSH1 * z;
  f[3] = -kSH1 * x;
  if (basis < 9) return;
  const double xx = x * x, yy = y * y, zz = z * z;
  f[4] = kSH2[0] * x * y;
  f[5] = kSH2[1] * y * z;
  f[6] = kSH2[2] * (2.0 * zz - xx - yy);
  f[7] = kSH2[3] * x * z;
  f[8] = kSH2[4] * (xx - yy);
  if (basis < 16) return;
  f[9] = kSH3[0] * y * (3.0 * xx - yy);
  f[10] = kSH3[1] * x * y * z;
  f[11] = kSH3[2] * y * (4.0 * zz - xx - yy);
  f[12] = kSH3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
  f[13] = kSH3[4] * x * (4.0 * zz - xx - yy);
  f[14] = kSH3[5] * z * (xx - yy);
  f[15] = kSH3[6] * x * (xx - yy);
}

struct TileGrid {
  int tiles_x, tiles_y, tile_size;
};

// tile span covered by the disk of given radius around center, clamped
void tile_span(const TileGrid& g, const Vec2& center, double radius, int& tx0, int& tx1,
               int& ty0, int& ty1) {
  tx0 = std::max(0, static_cast<int>(std::floor((center.x() - radius) / g.tile_size)));
  tx1 = std::min(g.tiles_x - 1, static_cast<int>(std::floor((center.x() + radius) / g.tile_size)));
  ty0 = std::max(0, static_cast<int>(std::floor((center.y() - radius) / g.tile_size)));
  ty1 = std::min(g.tiles_y - 1, static_cast<int>(std::floor((center.y() + radius) / g.tile_size)));
}

}  // namespace

Mat3 compute_cov3d(const Vec4& r, const Vec3& s) {
  if (!(s.minCoeff() > 0.0)) throw std::invalid_argument("compute_cov3d: nonpositive scale");
  const Mat3 rot = quat_to_rotation(r);
  return rot * s.cwiseProduct(s).asDiagonal() * rot.transpose();
}

std::optional<ProjectedGaussian> project_gaussian(const Vec3& mean, const Mat3& cov3d,
                                                  const SE3Pose& pose,
                                                  const CameraIntrinsics& k, double z_near) {
  const Vec3 m = pose.rotation * mean + pose.translation;
  if (m.z() <= z_near) return std::nullopt;
  const double z = m.z();

  ProjectedGaussian out;
  out.depth = z;
  out.center = Vec2{k.fx * m.x() / z + k.cx, k.fy * m.y() / z + k.cy};

  Eigen::Matrix<double, 2, 3> jac;
  jac << k.fx / z, 0.0, -k.fx * m.x() / (z * z), 0.0, k.fy / z, -k.fy * m.y() / (z * z);
  const Mat3 w = pose.rotation * cov3d * pose.rotation.transpose();
  out.cov2d = jac * w * jac.transpose() + kCovDilation * Mat2::Identity();
  return out;
}

Vec3 eval_sh(const std::vector<double>& coeffs, int basis, const Vec3& dir) {
  if (basis != 1 && basis != 4 && basis != 9 && basis != 16)
    throw std::invalid_argument("eval_sh: bad basis count");
  if (coeffs.size() != static_cast<std::size_t>(3 * basis))
    throw std::invalid_argument("eval_sh: bad coefficient count");
  double f[16];
  sh_basis(basis, dir, f);
  Vec3 rgb;
  for (int ch = 0; ch < 3; ++ch) {
    double v = 0.5;
    for (int b = 0; b < basis; ++b) v += f[b] * coeffs[ch * basis + b];
    rgb[ch] = std::max(0.0, v);
  }
  return rgb;
}

std::pair<RenderedImage, RenderSaved> render(const GaussianObject& obj, const SE3Pose& pose,
                                             const CameraIntrinsics& k,
                                             const RenderOptions& opts) {
  if (k.width <= 0 || k.height <= 0) throw std::invalid_argument("render: bad image size");
  const int w = k.width, h = k.height;
  const std::size_t u = obj.size();
  const int basis = obj.basis_count();
  const Vec3 cam_center = pose.camera_center();
  const int threads = resolve_threads(opts.threads);

  RenderSaved saved;
  saved.width = w;
  saved.height = h;
  saved.intrinsics = k;
  saved.cam_rotation = pose.rotation;
  saved.background = opts.background;
  saved.num_primitives = u;
  saved.threads = threads;

  // project every primitive; slot-per-primitive keeps this phase order-free
  std::vector<SplatRecord> projected(u);
  std::vector<std::uint8_t> keep(u, 0);
  parallel_for(static_cast<int>(u), threads, [&](int i) {
    if (255.0 * obj.opacities[i] <= 1.0) return;  // can never pass the skip threshold
    const Mat3 cov3d = compute_cov3d(obj.orientations[i], obj.scales[i]);
    const auto proj = project_gaussian(obj.means[i], cov3d, pose, k, opts.z_near);
    if (!proj) return;
    const Mat2& c2 = proj->cov2d;
    const double det = c2(0, 0) * c2(1, 1) - c2(0, 1) * c2(0, 1);
    if (det <= 1e-12) return;

    const double mid = 0.5 * (c2(0, 0) + c2(1, 1));
    const double lambda_max = mid + std::sqrt(std::max(mid * mid - det, 0.0));
    // support radius: beyond it alpha' < 1/255 is guaranteed
    const double radius = std::sqrt(2.0 * lambda_max * std::log(255.0 * obj.opacities[i]));
    if (!(radius > 0.0)) return;
    if (proj->center.x() + radius < 0.0 || proj->center.x() - radius > w - 1 ||
        proj->center.y() + radius < 0.0 || proj->center.y() - radius > h - 1)
      return;

    SplatRecord s;
    s.center = proj->center;
    const double inv_det = 1.0 / det;
    s.conic[0] = c2(1, 1) * inv_det;
    s.conic[1] = -c2(0, 1) * inv_det;
    s.conic[2] = c2(0, 0) * inv_det;
    s.depth = proj->depth;
    s.opacity = obj.opacities[i];
    s.cam_mean = pose.rotation * obj.means[i] + pose.translation;
    const Mat3 vrk = pose.rotation * cov3d * pose.rotation.transpose();
    s.vrk[0] = vrk(0, 0);
    s.vrk[1] = vrk(0, 1);
    s.vrk[2] = vrk(0, 2);
    s.vrk[3] = vrk(1, 1);
    s.vrk[4] = vrk(1, 2);
    s.vrk[5] = vrk(2, 2);
    s.radius = radius;
    s.index = i;

    Vec3 dir = obj.means[i] - cam_center;
    const double dn = dir.norm();
    dir = dn > 1e-12 ? Vec3(dir / dn) : Vec3{0, 0, 1};
    std::vector<double> coeffs(3 * basis);
    for (int ch = 0; ch < 3; ++ch)
      for (int b = 0; b < basis; ++b) coeffs[ch * basis + b] = obj.sh(i, ch, b);
    const Vec3 rgb = eval_sh(coeffs, basis, dir);
    s.color = rgb.cwiseMin(1.0);  // eval_sh already clamps below

    projected[i] = s;
    keep[i] = 1;
  });

  saved.splats.reserve(u);
  for (std::size_t i = 0; i < u; ++i)
    if (keep[i]) saved.splats.push_back(projected[i]);

  // tile grid; the naive oracle treats the image as a single tile
  TileGrid grid;
  if (opts.naive) {
    grid.tile_size = std::max(w, h);
    grid.tiles_x = grid.tiles_y = 1;
  } else {
    grid.tile_size = kTileSize;
    grid.tiles_x = (w + kTileSize - 1) / kTileSize;
    grid.tiles_y = (h + kTileSize - 1) / kTileSize;
  }
  saved.tile_size = grid.tile_size;
  saved.tiles_x = grid.tiles_x;
  saved.tiles_y = grid.tiles_y;
  const int n_tiles = grid.tiles_x * grid.tiles_y;
  const int n_splats = static_cast<int>(saved.splats.size());

  std::vector<int> counts(n_tiles, 0);
  for (int i = 0; i < n_splats; ++i) {
    int tx0, tx1, ty0, ty1;
    tile_span(grid, saved.splats[i].center, saved.splats[i].radius, tx0, tx1, ty0, ty1);
    for (int ty = ty0; ty <= ty1; ++ty)
      for (int tx = tx0; tx <= tx1; ++tx) ++counts[ty * grid.tiles_x + tx];
  }
  saved.tile_ranges.resize(n_tiles);
  int total = 0;
  for (int t = 0; t < n_tiles; ++t) {
    saved.tile_ranges[t] = {total, total + counts[t]};
    total += counts[t];
  }
  saved.point_list.resize(total);
  {
    std::vector<int> cursor(n_tiles);
    for (int t = 0; t < n_tiles; ++t) cursor[t] = saved.tile_ranges[t].first;
    for (int i = 0; i < n_splats; ++i) {
      int tx0, tx1, ty0, ty1;
      tile_span(grid, saved.splats[i].center, saved.splats[i].radius, tx0, tx1, ty0, ty1);
      for (int ty = ty0; ty <= ty1; ++ty)
        for (int tx = tx0; tx <= tx1; ++tx) saved.point_list[cursor[ty * grid.tiles_x + tx]++] = i;
    }
  }
  // front-to-back order within each tile; ties broken by primitive order
  parallel_for(n_tiles, threads, [&](int t) {
    auto [b, e] = saved.tile_ranges[t];
    std::sort(saved.point_list.begin() + b, saved.point_list.begin() + e, [&](int x, int y) {
      if (saved.splats[x].depth != saved.splats[y].depth)
        return saved.splats[x].depth < saved.splats[y].depth;
      return x < y;
    });
  });

  RenderedImage img;
  img.rgb = Image(h, w, 3);
  img.alpha = Image(h, w, 1);
  saved.final_transmittance.assign(static_cast<std::size_t>(h) * w, 1.0);
  saved.contrib_count.assign(static_cast<std::size_t>(h) * w, 0);

  parallel_for(n_tiles, threads, [&](int t) {
    const int ty = t / grid.tiles_x, tx = t % grid.tiles_x;
    const int px0 = tx * grid.tile_size, px1 = std::min(w, px0 + grid.tile_size);
    const int py0 = ty * grid.tile_size, py1 = std::min(h, py0 + grid.tile_size);
    const auto [b, e] = saved.tile_ranges[t];
    for (int py = py0; py < py1; ++py) {
      for (int px = px0; px < px1; ++px) {
        double trans = 1.0;
        double rgb[3] = {0, 0, 0};
        int n_contrib = 0;
        for (int pos = b; pos < e; ++pos) {
          const SplatRecord& s = saved.splats[saved.point_list[pos]];
          const double dx = px - s.center.x(), dy = py - s.center.y();
          if (dx * dx + dy * dy > s.radius * s.radius) continue;
          const double power =
              -0.5 * (s.conic[0] * dx * dx + s.conic[2] * dy * dy) - s.conic[1] * dx * dy;
          if (power > 0.0) continue;
          const double alpha = std::min(kAlphaCap, s.opacity * std::exp(power));
          if (alpha < kAlphaSkip) continue;
          const double test_trans = trans * (1.0 - alpha);
          if (test_trans < kTransmitStop) break;
          const double wgt = alpha * trans;
          rgb[0] += s.color[0] * wgt;
          rgb[1] += s.color[1] * wgt;
          rgb[2] += s.color[2] * wgt;
          trans = test_trans;
          n_contrib = pos - b + 1;
        }
        const std::size_t pix = static_cast<std::size_t>(py) * w + px;
        for (int c = 0; c < 3; ++c) img.rgb.data[pix * 3 + c] = rgb[c] + opts.background[c] * trans;
        img.alpha.data[pix] = 1.0 - trans;
        saved.final_transmittance[pix] = trans;
        saved.contrib_count[pix] = n_contrib;
      }
    }
  });

  return {std::move(img), std::move(saved)};
}

std::vector<Vec3> render_backward(const RenderSaved& saved, const Image& d_image) {
  if (d_image.height != saved.height || d_image.width != saved.width || d_image.channels != 3)
    throw std::invalid_argument("render_backward: mismatched shapes");
  for (double v : d_image.data)
    if (!std::isfinite(v)) throw std::invalid_argument("render_backward: non-finite gradient");

  const int w = saved.width;
  const int n_tiles = saved.tiles_x * saved.tiles_y;
  // (d_center_x, d_center_y, d_conic_a, d_conic_b, d_conic_c) per tile entry
  std::vector<double> pair_grads(saved.point_list.size() * 5, 0.0);

  parallel_for(n_tiles, saved.threads, [&](int t) {
    const int ty = t / saved.tiles_x, tx = t % saved.tiles_x;
    const int px0 = tx * saved.tile_size, px1 = std::min(w, px0 + saved.tile_size);
    const int py0 = ty * saved.tile_size, py1 = std::min(saved.height, py0 + saved.tile_size);
    const auto [b, e] = saved.tile_ranges[t];
    for (int py = py0; py < py1; ++py) {
      for (int px = px0; px < px1; ++px) {
        const std::size_t pix = static_cast<std::size_t>(py) * w + px;
        const int n_contrib = saved.contrib_count[pix];
        if (n_contrib == 0) continue;
        const double* dpix = &d_image.data[pix * 3];
        if (dpix[0] == 0.0 && dpix[1] == 0.0 && dpix[2] == 0.0) continue;

        double t_behind = saved.final_transmittance[pix];
        // suffix sum of composited color, seeded with the background term
        double suffix[3] = {saved.background[0] * t_behind, saved.background[1] * t_behind,
                            saved.background[2] * t_behind};
        for (int pos = b + n_contrib - 1; pos >= b; --pos) {
          const SplatRecord& s = saved.splats[saved.point_list[pos]];
          const double dx = px - s.center.x(), dy = py - s.center.y();
          if (dx * dx + dy * dy > s.radius * s.radius) continue;
          const double power =
              -0.5 * (s.conic[0] * dx * dx + s.conic[2] * dy * dy) - s.conic[1] * dx * dy;
          if (power > 0.0) continue;
          const double alpha_raw = s.opacity * std::exp(power);
          const double alpha = std::min(kAlphaCap, alpha_raw);
          if (alpha < kAlphaSkip) continue;

          const double t_here = t_behind / (1.0 - alpha);
          double d_alpha = 0.0;
          for (int c = 0; c < 3; ++c)
            d_alpha += dpix[c] * (s.color[c] * t_here - suffix[c] / (1.0 - alpha));
          for (int c = 0; c < 3; ++c) suffix[c] += s.color[c] * alpha * t_here;
          t_behind = t_here;

          if (alpha_raw >= kAlphaCap) continue;  // capped: flat region
          const double d_power = d_alpha * alpha_raw;
          double* pg = &pair_grads[static_cast<std::size_t>(pos) * 5];
          pg[0] += d_power * (s.conic[0] * dx + s.conic[1] * dy);
          pg[1] += d_power * (s.conic[1] * dx + s.conic[2] * dy);
          pg[2] += d_power * (-0.5 * dx * dx);
          pg[3] += d_power * (-dx * dy);
          pg[4] += d_power * (-0.5 * dy * dy);
        }
      }
    }
  });

  // deterministic reduction: flat pair order is independent of thread count
  std::vector<double> splat_grads(saved.splats.size() * 5, 0.0);
  for (std::size_t pos = 0; pos < saved.point_list.size(); ++pos) {
    const std::size_t s = static_cast<std::size_t>(saved.point_list[pos]);
    for (int c = 0; c < 5; ++c) splat_grads[s * 5 + c] += pair_grads[pos * 5 + c];
  }

  std::vector<Vec3> d_means(saved.num_primitives, Vec3::Zero());
  const CameraIntrinsics& k = saved.intrinsics;
  const Mat3 rot_t = saved.cam_rotation.transpose();
  parallel_for(static_cast<int>(saved.splats.size()), saved.threads, [&](int i) {
    const SplatRecord& s = saved.splats[i];
    const double* g = &splat_grads[static_cast<std::size_t>(i) * 5];

    Mat2 conic;
    conic << s.conic[0], s.conic[1], s.conic[1], s.conic[2];
    Mat2 g_conic;
    g_conic << g[2], g[3] / 2.0, g[3] / 2.0, g[4];
    const Mat2 g_sigma = -(conic * g_conic * conic);

    const double x = s.cam_mean.x(), y = s.cam_mean.y(), z = s.cam_mean.z();
    Eigen::Matrix<double, 2, 3> jac;
    jac << k.fx / z, 0.0, -k.fx * x / (z * z), 0.0, k.fy / z, -k.fy * y / (z * z);
    Mat3 vrk;
    vrk << s.vrk[0], s.vrk[1], s.vrk[2], s.vrk[1], s.vrk[3], s.vrk[4], s.vrk[2], s.vrk[4],
        s.vrk[5];
    const Eigen::Matrix<double, 2, 3> g_jac = 2.0 * g_sigma * jac * vrk;

    Vec3 g_cam = Vec3::Zero();
    const double z2 = z * z, z3 = z2 * z;
    g_cam.x() += g_jac(0, 2) * (-k.fx / z2);
    g_cam.y() += g_jac(1, 2) * (-k.fy / z2);
    g_cam.z() += g_jac(0, 0) * (-k.fx / z2) + g_jac(1, 1) * (-k.fy / z2) +
                 g_jac(0, 2) * (2.0 * k.fx * x / z3) + g_jac(1, 2) * (2.0 * k.fy * y / z3);
    g_cam.x() += g[0] * k.fx / z;
    g_cam.y() += g[1] * k.fy / z;
    g_cam.z() += g[0] * (-k.fx * x / z2) + g[1] * (-k.fy * y / z2);

    d_means[s.index] = rot_t * g_cam;
  });

  return d_means;
}

std::pair<Vec4, Vec3> pose_gradient(const std::vector<Vec3>& d_means, const GaussianObject& obj,
                                    const TransformParams& delta) {
  if (d_means.size() != obj.size()) throw std::invalid_argument("pose_gradient: mismatched shapes");
  const double n = delta.q.norm();
  if (n <= 1e-12) throw std::invalid_argument("degenerate quaternion");
  const Vec4 qh = delta.q / n;

  Vec3 dt = Vec3::Zero();
  Mat3 outer = Mat3::Zero();  // sum of d_means_i * mu_i^T
  for (std::size_t i = 0; i < d_means.size(); ++i) {
    dt += d_means[i];
    outer += d_means[i] * obj.means[i].transpose();
  }

  const double qw = qh[0], qx = qh[1], qy = qh[2], qz = qh[3];
  Mat3 dr[4];
  dr[0] << 0, -qz, qy, qz, 0, -qx, -qy, qx, 0;
  dr[1] << 0, qy, qz, qy, -2 * qx, -qw, qz, qw, -2 * qx;
  dr[2] << -2 * qy, qx, qw, qx, 0, qz, -qw, qz, -2 * qy;
  dr[3] << -2 * qz, -qw, qx, qw, -2 * qz, qy, qx, qy, 0;

  Vec4 dq_hat;
  for (int j = 0; j < 4; ++j) dq_hat[j] = 2.0 * (dr[j].cwiseProduct(outer)).sum();
  const Vec4 dq = (Eigen::Matrix4d::Identity() - qh * qh.transpose()) * dq_hat / n;
  return {dq, dt};
}

}  // namespace gspose
