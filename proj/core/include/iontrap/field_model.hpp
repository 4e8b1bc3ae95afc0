#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "iontrap/vec3.hpp"

namespace iontrap {

/// Electrostatic field that is linear in a fixed set of electrode voltages.
/// Implementations are immutable after construction and safe to share across
/// threads.
class FieldModel {
 public:
  virtual ~FieldModel() = default;

  virtual std::size_t electrode_count() const = 0;
  virtual std::string name() const = 0;

  virtual double potential(const Vec3& p, std::span<const double> volts) const = 0;
  virtual Vec3 field(const Vec3& p, std::span<const double> volts) const = 0;

  /// Field of each electrode held at 1 V with all others grounded.
  /// `out` must have electrode_count() entries.
  virtual void basis_fields(const Vec3& p, std::span<Vec3> out) const;
  virtual void basis_potentials(const Vec3& p, std::span<double> out) const;
};

using FieldModelPtr = std::shared_ptr<const FieldModel>;

/// Conventional quadrupole trap (ring r0, endcaps z0). Electrodes: ring,
/// endcap_pos, endcap_neg. The endcaps share the complement of the ring
/// basis equally, so the model is exact only for equal endcap voltages.
class AnalyticQuadrupoleField final : public FieldModel {
 public:
  AnalyticQuadrupoleField(double r0, double z0);
  std::size_t electrode_count() const override { return 3; }
  std::string name() const override { return "analytic"; }
  double potential(const Vec3& p, std::span<const double> volts) const override;
  Vec3 field(const Vec3& p, std::span<const double> volts) const override;

 private:
  double r0_, z0_, denom_;
};

/// Ideal linear trap. Electrodes: rf_rods, ground_rods, ring_pos, ring_neg.
/// Rods contribute (v_rf - v_gnd)/2 (x^2 - y^2)/r0^2 + (v_rf + v_gnd)/2; each
/// ring contributes kappa v/2 (z^2 - (x^2 + y^2)/2)/z0^2.
class AnalyticLinearField final : public FieldModel {
 public:
  AnalyticLinearField(double r0, double z0, double kappa);
  std::size_t electrode_count() const override { return 4; }
  std::string name() const override { return "analytic"; }
  double potential(const Vec3& p, std::span<const double> volts) const override;
  Vec3 field(const Vec3& p, std::span<const double> volts) const override;

 private:
  double r0_, z0_, kappa_;
};

/// Isotropic static well: one electrode, potential v * curvature/2 * |p|^2.
class HarmonicWellField final : public FieldModel {
 public:
  explicit HarmonicWellField(double curvature) : curvature_(curvature) {}
  std::size_t electrode_count() const override { return 1; }
  std::string name() const override { return "harmonic"; }
  double potential(const Vec3& p, std::span<const double> volts) const override;
  Vec3 field(const Vec3& p, std::span<const double> volts) const override;

 private:
  double curvature_;  // V/m^2 per volt
};

/// No electrodes, no field.
class ZeroField final : public FieldModel {
 public:
  std::size_t electrode_count() const override { return 0; }
  std::string name() const override { return "zero"; }
  double potential(const Vec3&, std::span<const double>) const override { return 0.0; }
  Vec3 field(const Vec3&, std::span<const double>) const override { return {}; }
};

} // namespace iontrap
