#pragma once

#include <atomic>
#include <vector>

#include "iontrap/field_model.hpp"

namespace iontrap {

/// Per-electrode basis fields and potentials tabulated on a regular grid over
/// an axis-aligned box, interpolated with 4x4x4 Lagrange (tricubic) stencils.
/// Points outside the box are delegated to the source model.
class CachedField final : public FieldModel {
 public:
  /// `nodes` per axis, at least 4.
  CachedField(FieldModelPtr source, const Vec3& box_min, const Vec3& box_max, int nodes);

  std::size_t electrode_count() const override { return ne_; }
  std::string name() const override { return source_->name(); }
  double potential(const Vec3& p, std::span<const double> volts) const override;
  Vec3 field(const Vec3& p, std::span<const double> volts) const override;
  void basis_fields(const Vec3& p, std::span<Vec3> out) const override;
  void basis_potentials(const Vec3& p, std::span<double> out) const override;

  bool contains(const Vec3& p) const;
  const FieldModel& source() const { return *source_; }
  const Vec3& box_min() const { return lo_; }
  const Vec3& box_max() const { return hi_; }
  int nodes() const { return n_; }
  /// Evaluations that fell outside the box and went to the source model.
  std::size_t fallback_count() const { return fallbacks_.load(); }

 private:
  struct Stencil {
    std::size_t base[3];
    double w[3][4];
  };
  Stencil stencil(const Vec3& p) const;
  const double* node(std::size_t i, std::size_t j, std::size_t k) const {
    return &table_[((i * n_ + j) * n_ + k) * ne_ * 4];
  }

  FieldModelPtr source_;
  std::size_t ne_;
  Vec3 lo_, hi_, h_;
  std::size_t n_;
  std::vector<double> table_;  // per node, per electrode: Ex, Ey, Ez, Phi
  mutable std::atomic<std::size_t> fallbacks_{0};
};

} // namespace iontrap
