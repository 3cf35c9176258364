#pragma once

#include <vector>

#include <Eigen/Dense>

// Magnetic field of the pulser coil pair, modeled as thin circular loops
// (turns coincident, wire width neglected). Exact single-loop fields via
// complete elliptic integrals; an axisymmetric lookup grid with bilinear
// interpolation serves the Monte Carlo inner loop.

namespace qzeeman {

struct CoilGeometry {
  double loop_radius = 0.025;             // a, m
  int turns_per_coil = 10;                // n
  double separation = 0.025;              // d, m, center-to-center
  Eigen::Vector3d axis{0.0, 1.0, 0.0};    // unit vector
  Eigen::Vector3d center{0.0, 0.0, 0.0};  // m

  static CoilGeometry helmholtz_preset() { return {}; }
  void validate() const;
};

struct FieldSample {
  Eigen::Vector3d point;  // m
  Eigen::Vector3d b;      // T (or T/A for per-ampere maps)
};

// Complete elliptic integrals K(k), E(k) of modulus k via the
// arithmetic-geometric mean, to machine precision.
void complete_elliptic(double k, double& big_k, double& big_e);

// Exact thin-loop field at a point. Throws std::domain_error when the
// point lies within 1e-6 * radius of the wire ring.
Eigen::Vector3d loop_field(double radius, const Eigen::Vector3d& loop_center,
                           const Eigen::Vector3d& axis, double current,
                           const Eigen::Vector3d& point);

// Superposition of both coils (2n coincident turns total).
Eigen::Vector3d pair_field(const CoilGeometry& geom, double current,
                           const Eigen::Vector3d& point);

// Per-ampere field vectors b(r) with pair_field(geom, I, r) = I * b(r).
std::vector<FieldSample> field_scale_map(const CoilGeometry& geom,
                                         const std::vector<Eigen::Vector3d>& grid);

// Per-ampere axial field at the pair center, projected on the coil axis.
double center_field_per_ampere(const CoilGeometry& geom);

// Cached per-ampere field on a (rho, z) half-plane grid around the coil
// axis; queries are bilinear in (rho, z) and exact in azimuth.
class AxisymmetricFieldMap {
 public:
  AxisymmetricFieldMap(const CoilGeometry& geom, double rho_max, double z_max,
                       std::size_t n_rho, std::size_t n_z);

  // b(r) in T/A. Throws std::out_of_range outside the gridded region.
  Eigen::Vector3d field_per_ampere(const Eigen::Vector3d& point) const;

  const CoilGeometry& geometry() const { return geom_; }

 private:
  CoilGeometry geom_;
  Eigen::Vector3d e_perp_;  // reference transverse direction for grid build
  double rho_max_, z_max_;
  std::size_t n_rho_, n_z_;
  double d_rho_, d_z_;
  std::vector<double> b_rho_;    // [iz * n_rho + irho]
  std::vector<double> b_axial_;  // same layout
};

}  // namespace qzeeman
