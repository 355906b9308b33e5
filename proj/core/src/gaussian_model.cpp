#include "gspose/gaussian_model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace gspose {

void GaussianObject::validate() const {
  const std::size_t u = size();
  if (u == 0) throw std::runtime_error("empty object");
  if (orientations.size() != u || scales.size() != u || opacities.size() != u)
    throw std::runtime_error("inconsistent field counts");
  if (sh_degree < 0 || sh_degree > 3) throw std::runtime_error("unsupported sh_degree");
  if (sh_coeffs.size() != u * 3 * static_cast<std::size_t>(basis_count()))
    throw std::runtime_error("inconsistent sh_coeffs size");
  for (std::size_t i = 0; i < u; ++i) {
    if (!(scales[i].minCoeff() > 0.0)) throw std::runtime_error("nonpositive scale");
    if (!(opacities[i] >= 0.0 && opacities[i] <= 1.0))
      throw std::runtime_error("opacity out of range");
    if (std::abs(orientations[i].norm() - 1.0) > 1e-6)
      throw std::runtime_error("orientation not unit norm");
    if (!means[i].allFinite() || !scales[i].allFinite() || !orientations[i].allFinite())
      throw std::runtime_error("non-finite field");
  }
  if (u >= 2) {
    if (!(diameter > 0.0)) throw std::runtime_error("nonpositive diameter");
    if (std::abs(diameter - object_diameter(means)) > 1e-6)
      throw std::runtime_error("diameter inconsistent with means");
  }
}

double object_diameter(const std::vector<Vec3>& means) {
  if (means.size() < 2) throw std::invalid_argument("object_diameter: need at least 2 points");
  Vec3 lo = means[0], hi = means[0];
  for (const Vec3& m : means) {
    lo = lo.cwiseMin(m);
    hi = hi.cwiseMax(m);
  }
  return (hi - lo).norm();
}

GaussianObject rigid_transform_object(const GaussianObject& obj,
                                      const TransformParams& delta,
                                      bool transform_covariance) {
  const Mat3 r = quat_to_rotation(delta.q);
  GaussianObject out = obj;
  for (std::size_t i = 0; i < out.size(); ++i) out.means[i] = r * obj.means[i] + delta.t;
  if (transform_covariance) {
    const Vec4 qn = delta.q / delta.q.norm();
    for (std::size_t i = 0; i < out.size(); ++i)
      out.orientations[i] = quat_multiply(qn, obj.orientations[i]);
  }
  return out;
}

GaussianObject synth_object(std::uint64_t seed, int count, double extent, int sh_degree) {
  if (count < 1) throw std::invalid_argument("synth_object: count must be >= 1");
  if (sh_degree < 0 || sh_degree > 3) throw std::invalid_argument("synth_object: bad sh_degree");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  GaussianObject obj;
  obj.sh_degree = sh_degree;
  const int b = obj.basis_count();
  obj.means.resize(count);
  obj.orientations.resize(count);
  obj.scales.resize(count);
  obj.opacities.resize(count);
  obj.sh_coeffs.resize(static_cast<std::size_t>(count) * 3 * b, 0.0);

  const double s_lo = extent / 100.0, s_hi = extent / 20.0;
  for (int i = 0; i < count; ++i) {
    obj.means[i] = Vec3{(unit(rng) - 0.5) * extent, (unit(rng) - 0.5) * extent,
                        (unit(rng) - 0.5) * extent};
    Vec4 q{unit(rng) * 2 - 1, unit(rng) * 2 - 1, unit(rng) * 2 - 1, unit(rng) * 2 - 1};
    if (q.norm() < 1e-3) q = Vec4{1, 0, 0, 0};
    obj.orientations[i] = q / q.norm();
    obj.scales[i] = Vec3{s_lo + unit(rng) * (s_hi - s_lo), s_lo + unit(rng) * (s_hi - s_lo),
                         s_lo + unit(rng) * (s_hi - s_lo)};
    obj.opacities[i] = 0.5 + 0.5 * unit(rng);
    // DC coefficients chosen so decoded colors land in (0.06, 0.94)
    const double c0 = 0.28209479177387814;
    for (int ch = 0; ch < 3; ++ch) obj.sh(i, ch, 0) = (unit(rng) * 0.88 - 0.44) / c0;
    for (int ch = 0; ch < 3; ++ch)
      for (int k = 1; k < b; ++k) obj.sh(i, ch, k) = (unit(rng) - 0.5) * 0.1;
  }
  obj.diameter = count >= 2 ? object_diameter(obj.means) : 0.0;
  return obj;
}

}  // namespace gspose
