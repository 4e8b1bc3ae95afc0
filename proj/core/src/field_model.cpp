#include "iontrap/field_model.hpp"

#include <algorithm>
#include <cmath>

#include "iontrap/drive.hpp"
#include "iontrap/error.hpp"

namespace iontrap {

void FieldModel::basis_fields(const Vec3& p, std::span<Vec3> out) const {
  std::vector<double> unit(electrode_count(), 0.0);
  for (std::size_t e = 0; e < unit.size(); ++e) {
    unit[e] = 1.0;
    out[e] = field(p, unit);
    unit[e] = 0.0;
  }
}

void FieldModel::basis_potentials(const Vec3& p, std::span<double> out) const {
  std::vector<double> unit(electrode_count(), 0.0);
  for (std::size_t e = 0; e < unit.size(); ++e) {
    unit[e] = 1.0;
    out[e] = potential(p, unit);
    unit[e] = 0.0;
  }
}

// ---- drive -------------------------------------------------------------------

double DriveWaveform::rf_omega() const {
  double w = 0.0;
  for (const auto& c : channels)
    if (c.amplitude != 0.0) w = std::max(w, c.omega);
  return w;
}

bool DriveWaveform::is_static() const {
  return std::all_of(channels.begin(), channels.end(),
                     [](const DriveChannel& c) { return c.amplitude == 0.0 || c.omega == 0.0; });
}

void instantaneous_voltages(const DriveWaveform& drive, double t, std::span<double> out) {
  for (std::size_t e = 0; e < drive.channels.size(); ++e) {
    const auto& c = drive.channels[e];
    out[e] = c.dc + c.amplitude * std::cos(c.omega * t + c.phase);
  }
}

std::vector<double> instantaneous_voltages(const DriveWaveform& drive, double t) {
  std::vector<double> v(drive.size());
  instantaneous_voltages(drive, t, v);
  return v;
}

// ---- analytic models ---------------------------------------------------------

AnalyticQuadrupoleField::AnalyticQuadrupoleField(double r0, double z0)
    : r0_(r0), z0_(z0), denom_(r0 * r0 + 2.0 * z0 * z0) {
  if (!(denom_ > 0.0)) throw GeometryError("analytic quadrupole: r0^2 + 2 z0^2 must be positive");
}

double AnalyticQuadrupoleField::potential(const Vec3& p, std::span<const double> v) const {
  const double ring = (p.x * p.x + p.y * p.y - 2.0 * p.z * p.z + 2.0 * z0_ * z0_) / denom_;
  const double caps = 0.5 * (v[1] + v[2]);
  return v[0] * ring + caps * (1.0 - ring);
}

Vec3 AnalyticQuadrupoleField::field(const Vec3& p, std::span<const double> v) const {
  const double drive = v[0] - 0.5 * (v[1] + v[2]);
  // E = -grad: d/dx (x^2) = 2x, d/dz (-2 z^2) = -4z
  return {-2.0 * p.x * drive / denom_, -2.0 * p.y * drive / denom_, 4.0 * p.z * drive / denom_};
}

AnalyticLinearField::AnalyticLinearField(double r0, double z0, double kappa) : r0_(r0), z0_(z0), kappa_(kappa) {
  if (!(r0 > 0.0) || !(z0 > 0.0)) throw GeometryError("analytic linear trap: r0 and z0 must be positive");
}

double AnalyticLinearField::potential(const Vec3& p, std::span<const double> v) const {
  const double quad = 0.5 * (v[0] - v[1]) * (p.x * p.x - p.y * p.y) / (r0_ * r0_);
  const double common = 0.5 * (v[0] + v[1]);
  const double axial =
      0.5 * kappa_ * (v[2] + v[3]) * (p.z * p.z - 0.5 * (p.x * p.x + p.y * p.y)) / (z0_ * z0_);
  return quad + common + axial;
}

Vec3 AnalyticLinearField::field(const Vec3& p, std::span<const double> v) const {
  const double g = (v[0] - v[1]) / (r0_ * r0_);
  const double k = 0.5 * kappa_ * (v[2] + v[3]) / (z0_ * z0_);
  return {-g * p.x + k * p.x, g * p.y + k * p.y, -2.0 * k * p.z};
}

double HarmonicWellField::potential(const Vec3& p, std::span<const double> v) const {
  return v[0] * 0.5 * curvature_ * norm2(p);
}

Vec3 HarmonicWellField::field(const Vec3& p, std::span<const double> v) const { return -v[0] * curvature_ * p; }

} // namespace iontrap
