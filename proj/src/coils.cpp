#include "qzeeman/coils.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qzeeman/constants.hpp"

namespace qzeeman {

void CoilGeometry::validate() const {
  if (!(loop_radius > 0.0))
    throw std::invalid_argument("coils: loop radius must be > 0");
  if (turns_per_coil < 1)
    throw std::invalid_argument("coils: turns per coil must be >= 1");
  if (!(separation > 0.0))
    throw std::invalid_argument("coils: separation must be > 0");
  if (std::abs(axis.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("coils: axis must be a unit vector");
}

void complete_elliptic(double k, double& big_k, double& big_e) {
  if (!(k >= 0.0) || k >= 1.0)
    throw std::domain_error("complete_elliptic: modulus must be in [0, 1)");
  double a = 1.0;
  double b = std::sqrt((1.0 - k) * (1.0 + k));
  double c = k;
  double sum = 0.5 * c * c;
  double weight = 0.5;
  for (int iter = 0; iter < 64 && c > 1e-18 * a; ++iter) {
    const double an = 0.5 * (a + b);
    const double bn = std::sqrt(a * b);
    c = 0.5 * (a - b);
    a = an;
    b = bn;
    weight *= 2.0;
    sum += weight * c * c;
  }
  big_k = constants::pi / (2.0 * a);
  big_e = big_k * (1.0 - sum);
}

Eigen::Vector3d loop_field(double radius, const Eigen::Vector3d& loop_center,
                           const Eigen::Vector3d& axis, double current,
                           const Eigen::Vector3d& point) {
  const Eigen::Vector3d n = axis.normalized();
  const Eigen::Vector3d d = point - loop_center;
  const double z = d.dot(n);
  const Eigen::Vector3d rho_vec = d - z * n;
  const double rho = rho_vec.norm();

  const double ring_distance = std::hypot(rho - radius, z);
  if (ring_distance <= 1e-6 * radius)
    throw std::domain_error("loop_field: point lies on the wire ring");

  const double mu0_i = constants::vacuum_permeability * current;

  if (rho < 1e-10 * radius) {
    // On the axis the transverse component vanishes identically.
    const double denom = std::pow(radius * radius + z * z, 1.5);
    return n * (mu0_i * radius * radius / (2.0 * denom));
  }

  const double sum_sq = (radius + rho) * (radius + rho) + z * z;
  const double diff_sq = (radius - rho) * (radius - rho) + z * z;
  const double k = std::sqrt(4.0 * radius * rho / sum_sq);
  double big_k, big_e;
  complete_elliptic(k, big_k, big_e);

  const double pref = mu0_i / (constants::two_pi * std::sqrt(sum_sq));
  const double b_axial =
      pref * (big_k + big_e * (radius * radius - rho * rho - z * z) / diff_sq);
  const double b_radial =
      pref * (z / rho) *
      (-big_k + big_e * (radius * radius + rho * rho + z * z) / diff_sq);

  return b_axial * n + b_radial * (rho_vec / rho);
}

Eigen::Vector3d pair_field(const CoilGeometry& geom, double current,
                           const Eigen::Vector3d& point) {
  geom.validate();
  const Eigen::Vector3d n = geom.axis.normalized();
  const Eigen::Vector3d offset = 0.5 * geom.separation * n;
  const double turns = geom.turns_per_coil;
  // Per-ampere sum scaled once at the end, so the result is bit-exact
  // linear in the current.
  const Eigen::Vector3d per_ampere =
      loop_field(geom.loop_radius, geom.center + offset, n, turns, point) +
      loop_field(geom.loop_radius, geom.center - offset, n, turns, point);
  return per_ampere * current;
}

std::vector<FieldSample> field_scale_map(
    const CoilGeometry& geom, const std::vector<Eigen::Vector3d>& grid) {
  std::vector<FieldSample> out;
  out.reserve(grid.size());
  for (const auto& p : grid) out.push_back({p, pair_field(geom, 1.0, p)});
  return out;
}

double center_field_per_ampere(const CoilGeometry& geom) {
  return pair_field(geom, 1.0, geom.center).dot(geom.axis.normalized());
}

namespace {

Eigen::Vector3d any_perpendicular(const Eigen::Vector3d& n) {
  const Eigen::Vector3d trial =
      std::abs(n.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  return n.cross(trial).normalized();
}

}  // namespace

AxisymmetricFieldMap::AxisymmetricFieldMap(const CoilGeometry& geom,
                                           double rho_max, double z_max,
                                           std::size_t n_rho, std::size_t n_z)
    : geom_(geom),
      e_perp_(any_perpendicular(geom.axis.normalized())),
      rho_max_(rho_max),
      z_max_(z_max),
      n_rho_(n_rho),
      n_z_(n_z) {
  geom_.validate();
  if (n_rho < 2 || n_z < 3)
    throw std::invalid_argument("field map: grid too small");
  if (!(rho_max > 0.0) || !(z_max > 0.0))
    throw std::invalid_argument("field map: extents must be > 0");
  d_rho_ = rho_max_ / static_cast<double>(n_rho_ - 1);
  d_z_ = 2.0 * z_max_ / static_cast<double>(n_z_ - 1);
  b_rho_.resize(n_rho_ * n_z_);
  b_axial_.resize(n_rho_ * n_z_);
  const Eigen::Vector3d n = geom_.axis.normalized();
  for (std::size_t iz = 0; iz < n_z_; ++iz) {
    const double z = -z_max_ + static_cast<double>(iz) * d_z_;
    for (std::size_t ir = 0; ir < n_rho_; ++ir) {
      const double rho = static_cast<double>(ir) * d_rho_;
      const Eigen::Vector3d p = geom_.center + z * n + rho * e_perp_;
      const Eigen::Vector3d b = pair_field(geom_, 1.0, p);
      b_axial_[iz * n_rho_ + ir] = b.dot(n);
      b_rho_[iz * n_rho_ + ir] = (ir == 0) ? 0.0 : b.dot(e_perp_);
    }
  }
}

Eigen::Vector3d AxisymmetricFieldMap::field_per_ampere(
    const Eigen::Vector3d& point) const {
  const Eigen::Vector3d n = geom_.axis;
  const Eigen::Vector3d d = point - geom_.center;
  const double z = d.dot(n);
  const Eigen::Vector3d rho_vec = d - z * n;
  const double rho = rho_vec.norm();

  double fr = rho / d_rho_;
  double fz = (z + z_max_) / d_z_;
  if (fr < 0.0 || fr > static_cast<double>(n_rho_ - 1) + 1e-9 || fz < -1e-9 ||
      fz > static_cast<double>(n_z_ - 1) + 1e-9)
    throw std::out_of_range("field map: point outside gridded region");
  fr = std::min(fr, static_cast<double>(n_rho_ - 1) - 1e-12);
  fz = std::clamp(fz, 0.0, static_cast<double>(n_z_ - 1) - 1e-12);

  const auto ir = static_cast<std::size_t>(fr);
  const auto iz = static_cast<std::size_t>(fz);
  const double wr = fr - static_cast<double>(ir);
  const double wz = fz - static_cast<double>(iz);

  auto lerp2 = [&](const std::vector<double>& grid) {
    const double v00 = grid[iz * n_rho_ + ir];
    const double v01 = grid[iz * n_rho_ + ir + 1];
    const double v10 = grid[(iz + 1) * n_rho_ + ir];
    const double v11 = grid[(iz + 1) * n_rho_ + ir + 1];
    return (1.0 - wz) * ((1.0 - wr) * v00 + wr * v01) +
           wz * ((1.0 - wr) * v10 + wr * v11);
  };

  const double b_ax = lerp2(b_axial_);
  const double b_r = lerp2(b_rho_);
  if (rho < 1e-12) return b_ax * n;
  return b_ax * n + b_r * (rho_vec / rho);
}

}  // namespace qzeeman
