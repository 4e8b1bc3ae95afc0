#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iontrap/mesh.hpp"

namespace iontrap {

struct Electrode {
  int id = 0;
  std::string label;
  std::vector<std::size_t> panels;      // indices into TrapGeometry::panels()
  std::vector<RevolutionBody> bodies;   // solid description, used for rasterization
};

/// Meshed electrode set plus the trap's characteristic distances r0 and z0.
/// Immutable after construction.
class TrapGeometry {
 public:
  struct ElectrodeSpec {
    std::string label;
    std::vector<RevolutionBody> bodies;
  };

  /// Meshes every body with `options` and assigns electrode ids in order.
  static TrapGeometry build(std::string kind, std::vector<ElectrodeSpec> specs, const MeshOptions& options,
                            double r0, double z0);

  /// Wraps pre-meshed panels (e.g. from mesh_surface). Panel electrode ids
  /// must index `labels`.
  static TrapGeometry from_panels(std::string kind, std::vector<Panel> panels, std::vector<std::string> labels,
                                  double r0, double z0);

  const std::string& kind() const { return kind_; }
  const std::vector<Electrode>& electrodes() const { return electrodes_; }
  const std::vector<Panel>& panels() const { return panels_; }
  std::size_t electrode_count() const { return electrodes_.size(); }
  double r0() const { return r0_; }
  double z0() const { return z0_; }

  /// Largest |vertex| over all panels.
  double bounding_radius() const { return bounding_radius_; }

  std::optional<int> find_electrode(std::string_view label) const;
  int electrode_id(std::string_view label) const;  // throws GeometryError when missing

  /// Id of the electrode whose solid contains `p`, if any.
  std::optional<int> electrode_containing(const Vec3& p) const;

  /// Throws GeometryError if two panels share a centroid.
  void check_no_overlap() const;

 private:
  TrapGeometry() = default;
  void finish();

  std::string kind_;
  std::vector<Electrode> electrodes_;
  std::vector<Panel> panels_;
  double r0_ = 0.0;
  double z0_ = 0.0;
  double bounding_radius_ = 0.0;
  struct BodyRef {
    int electrode = 0;
    std::size_t body = 0;
    std::vector<ProfilePoint> polygon;
    double rho_max = 0.0;
    double zeta_min = std::numeric_limits<double>::infinity();
    double zeta_max = -std::numeric_limits<double>::infinity();
  };
  std::vector<BodyRef> bodies_;
};

// ---- trap parameter sets (SI units) ----------------------------------------

struct EndcapTrapParams {
  double inner_diameter = 0.5e-3;
  double inner_length = 16e-3;
  double outer_inner_diameter = 1.0e-3;
  double outer_outer_diameter = 2.0e-3;
  double inner_separation = 0.56e-3;  // 2 z0
  double outer_separation = 1.0e-3;
  double outer_cone_angle_deg = 45.0;
  // Axial length behind the bevel. Unset: the outer endcap runs back as a
  // sleeve to the far end of the inner endcap.
  std::optional<double> outer_thickness;
  double efficiency = 0.63;

  void validate() const;
  double z0() const { return 0.5 * inner_separation; }
  double outer_bevel_length() const;
  double outer_length() const;

  friend bool operator==(const EndcapTrapParams&, const EndcapTrapParams&) = default;
};

struct LinearTrapParams {
  double rod_diameter = 0.6e-3;
  double diagonal_separation = 2.4e-3;  // 2 r0
  double rod_length = 20e-3;
  double ring_diameter = 6.0e-3;        // inner diameter of the endcap rings
  double ring_wire_diameter = 1.0e-3;   // circular cross-section of the rings
  double ring_separation = 10e-3;       // 2 z0
  std::optional<double> geometric_factor;

  void validate() const;
  double r0() const { return 0.5 * diagonal_separation; }
  double z0() const { return 0.5 * ring_separation; }
  /// Distance of each rod axis from the trap axis.
  double rod_axis_distance() const { return r0() + 0.5 * rod_diameter; }

  friend bool operator==(const LinearTrapParams&, const LinearTrapParams&) = default;
};

MeshOptions default_ideal_mesh(double r0, int resolution = 32);
MeshOptions default_endcap_mesh(const EndcapTrapParams& p);
MeshOptions default_linear_mesh(const LinearTrapParams& p);

/// Hyperbolic ring (r^2 - 2 z^2 = r0^2) and endcaps (2 z^2 - r^2 = 2 z0^2)
/// with r0^2 = 2 z0^2, truncated at 3 r0. Electrodes: ring, endcap_pos, endcap_neg.
TrapGeometry build_ideal_quadrupole(double r0, const MeshOptions& options);
inline TrapGeometry build_ideal_quadrupole(double r0, int resolution = 32) {
  return build_ideal_quadrupole(r0, default_ideal_mesh(r0, resolution));
}

/// Electrodes: inner_endcap_pos, inner_endcap_neg, outer_endcap_pos, outer_endcap_neg.
TrapGeometry build_npl_endcap(const EndcapTrapParams& params, const MeshOptions& options);
inline TrapGeometry build_npl_endcap(const EndcapTrapParams& params = {}) {
  return build_npl_endcap(params, default_endcap_mesh(params));
}

/// Rods on the x axis form `rf_rods`, rods on the y axis `ground_rods`;
/// rings at z = +-z0 are `ring_pos` and `ring_neg`.
TrapGeometry build_innsbruck_linear(const LinearTrapParams& params, const MeshOptions& options);
inline TrapGeometry build_innsbruck_linear(const LinearTrapParams& params = {}) {
  return build_innsbruck_linear(params, default_linear_mesh(params));
}

// ---- closed solids for custom traps -----------------------------------------

/// Ball of `radius` about `center`.
RevolutionBody sphere_body(const Vec3& center, double radius);
/// Closed cylinder from frame.origin along frame.axis.
RevolutionBody rod_body(const Frame& frame, double radius, double length);
/// Torus about frame.axis through frame.origin; `major` is the centre-line radius.
RevolutionBody torus_body(const Frame& frame, double major, double minor);
/// Flat washer starting at frame.origin and extending `thickness` along the
/// axis. inner_radius = 0 gives a disc.
RevolutionBody washer_body(const Frame& frame, double inner_radius, double outer_radius, double thickness);

/// One row per panel: electrode_id, centroid, normal, area.
void write_panels_csv(std::ostream& os, const TrapGeometry& geometry);

} // namespace iontrap
