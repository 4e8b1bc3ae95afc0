#pragma once

#include <atomic>
#include <memory>
#include <span>
#include <vector>

#include "iontrap/field_model.hpp"
#include "iontrap/geometry.hpp"

namespace iontrap {

/// Dense collocation matrix: entry (i, j) is the potential at panel i's
/// centroid per unit charge density on panel j (V per C/m^2). Row-major.
class InfluenceMatrix {
 public:
  InfluenceMatrix() = default;
  explicit InfluenceMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Potential at `target` of panel `panel` carrying unit charge density.
/// Point-charge kernel in the far field, 4-point subdivision within two panel
/// diameters. Not valid for a panel's own centroid (see self_potential).
double panel_potential(const Panel& panel, const Vec3& target);

/// -grad of panel_potential with respect to the target point.
Vec3 panel_field(const Panel& panel, const Vec3& target);

/// Potential at the centre of a uniformly charged disc of the panel's area:
/// sqrt(area / pi) / (2 eps0).
double self_potential(const Panel& panel);

/// Throws GeometryError for an empty mesh or coincident centroids.
InfluenceMatrix assemble_influence_matrix(const TrapGeometry& mesh);

/// Per-electrode surface charge densities for unit-potential boundary conditions.
struct ChargeBasis {
  std::size_t panel_count = 0;
  std::size_t electrode_count = 0;
  std::vector<double> sigma;          // [panel * electrode_count + electrode], C/m^2
  std::vector<double> residual_inf;   // max |A sigma_e - b_e| per electrode, V
  double min_pivot_ratio = 0.0;       // min |U_ii| / max |U_ii|

  double at(std::size_t panel, std::size_t electrode) const { return sigma[panel * electrode_count + electrode]; }
  double max_residual() const;
};

/// Dense LU with partial pivoting and one back-substitution per electrode.
/// Throws SolverError naming the offending panel when a pivot falls below
/// 1e-14 of the largest.
ChargeBasis solve_charge_basis(const InfluenceMatrix& matrix, const TrapGeometry& mesh);

/// Total charge sum(sigma * area) for the given electrode voltages.
double total_charge(const ChargeBasis& basis, const TrapGeometry& mesh, std::span<const double> volts);

/// Direct-summation BEM field. Electrode order follows the geometry.
class BemField final : public FieldModel {
 public:
  BemField(std::shared_ptr<const TrapGeometry> geometry, ChargeBasis basis);

  /// Assembles and solves in one go.
  static std::shared_ptr<BemField> solve(std::shared_ptr<const TrapGeometry> geometry);

  std::size_t electrode_count() const override { return basis_.electrode_count; }
  std::string name() const override { return "bem"; }
  double potential(const Vec3& p, std::span<const double> volts) const override;
  Vec3 field(const Vec3& p, std::span<const double> volts) const override;
  void basis_fields(const Vec3& p, std::span<Vec3> out) const override;
  void basis_potentials(const Vec3& p, std::span<double> out) const override;

  const TrapGeometry& geometry() const { return *geometry_; }
  const ChargeBasis& basis() const { return basis_; }

  /// Number of evaluations requested at points inside a conductor solid.
  std::size_t inside_conductor_count() const { return inside_count_.load(); }

 private:
  void flag_inside(const Vec3& p) const;

  std::shared_ptr<const TrapGeometry> geometry_;
  ChargeBasis basis_;
  std::vector<double> diameter_;  // panel diameters
  mutable std::atomic<std::size_t> inside_count_{0};
};

} // namespace iontrap
