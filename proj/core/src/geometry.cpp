#include "iontrap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <tuple>

#include "iontrap/constants.hpp"
#include "iontrap/error.hpp"

namespace iontrap {
namespace {

using constants::pi;

RevolutionBody make_body(const Frame& frame, std::vector<ProfilePiece> pieces) {
  RevolutionBody b;
  b.frame = frame;
  b.pieces = std::move(pieces);
  return b;
}

// Closed polygon from straight segments through `pts`.
std::vector<ProfilePiece> polyline(const std::vector<ProfilePoint>& pts) {
  std::vector<ProfilePiece> out;
  for (std::size_t i = 0; i < pts.size(); ++i) out.push_back(ProfilePiece::line(pts[i], pts[(i + 1) % pts.size()]));
  return out;
}

Frame axial_frame(double direction) {
  Frame f;
  f.axis = {0.0, 0.0, direction};
  return f;
}

} // namespace

TrapGeometry TrapGeometry::build(std::string kind, std::vector<ElectrodeSpec> specs, const MeshOptions& options,
                                 double r0, double z0) {
  TrapGeometry g;
  g.kind_ = std::move(kind);
  g.r0_ = r0;
  g.z0_ = z0;
  for (std::size_t e = 0; e < specs.size(); ++e) {
    Electrode el;
    el.id = static_cast<int>(e);
    el.label = std::move(specs[e].label);
    el.bodies = std::move(specs[e].bodies);
    for (const auto& body : el.bodies) {
      for (auto& p : mesh_body(body, options, el.id)) {
        el.panels.push_back(g.panels_.size());
        g.panels_.push_back(p);
      }
    }
    g.electrodes_.push_back(std::move(el));
  }
  g.finish();
  return g;
}

TrapGeometry TrapGeometry::from_panels(std::string kind, std::vector<Panel> panels, std::vector<std::string> labels,
                                       double r0, double z0) {
  TrapGeometry g;
  g.kind_ = std::move(kind);
  g.r0_ = r0;
  g.z0_ = z0;
  for (std::size_t e = 0; e < labels.size(); ++e) {
    Electrode el;
    el.id = static_cast<int>(e);
    el.label = std::move(labels[e]);
    g.electrodes_.push_back(std::move(el));
  }
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const int id = panels[i].electrode_id;
    if (id < 0 || id >= static_cast<int>(g.electrodes_.size())) {
      throw GeometryError("panel " + std::to_string(i) + " has electrode id " + std::to_string(id) +
                          " outside the electrode list");
    }
    g.electrodes_[id].panels.push_back(i);
  }
  g.panels_ = std::move(panels);
  g.finish();
  return g;
}

void TrapGeometry::finish() {
  if (!(r0_ > 0.0) || !(z0_ > 0.0)) throw GeometryError("trap geometry needs r0 > 0 and z0 > 0");
  if (panels_.empty()) throw GeometryError("trap geometry has no panels");
  bounding_radius_ = 0.0;
  for (const auto& p : panels_)
    for (const auto& v : p.corners()) bounding_radius_ = std::max(bounding_radius_, norm(v));
  bodies_.clear();
  for (const auto& el : electrodes_)
    for (std::size_t b = 0; b < el.bodies.size(); ++b) {
      BodyRef ref{el.id, b, el.bodies[b].polygon()};
      for (const auto& q : ref.polygon) {
        ref.rho_max = std::max(ref.rho_max, q.rho);
        ref.zeta_min = std::min(ref.zeta_min, q.zeta);
        ref.zeta_max = std::max(ref.zeta_max, q.zeta);
      }
      bodies_.push_back(std::move(ref));
    }
}

std::optional<int> TrapGeometry::find_electrode(std::string_view label) const {
  for (const auto& e : electrodes_)
    if (e.label == label) return e.id;
  return std::nullopt;
}

int TrapGeometry::electrode_id(std::string_view label) const {
  if (auto id = find_electrode(label)) return *id;
  std::string known;
  for (const auto& e : electrodes_) known += (known.empty() ? "" : ", ") + e.label;
  throw GeometryError("no electrode named '" + std::string(label) + "' (have: " + known + ")");
}

std::optional<int> TrapGeometry::electrode_containing(const Vec3& p) const {
  for (const auto& ref : bodies_) {
    const auto& body = electrodes_[ref.electrode].bodies[ref.body];
    const ProfilePoint q = body.to_profile(p);
    if (q.rho > ref.rho_max || q.zeta < ref.zeta_min || q.zeta > ref.zeta_max) continue;
    if (point_in_polygon(ref.polygon, q)) return ref.electrode;
  }
  return std::nullopt;
}

void TrapGeometry::check_no_overlap() const {
  std::vector<std::size_t> order(panels_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ca = panels_[a].centroid;
    const auto& cb = panels_[b].centroid;
    return std::tie(ca.x, ca.y, ca.z) < std::tie(cb.x, cb.y, cb.z);
  });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (panels_[order[k]].centroid == panels_[order[k - 1]].centroid) {
      throw GeometryError("overlapping panels " + std::to_string(order[k - 1]) + " and " + std::to_string(order[k]) +
                          " share a centroid");
    }
  }
}

void EndcapTrapParams::validate() const {
  if (!(inner_separation > 0.0)) throw GeometryError("endcap trap: inner separation (2 z0) must be positive");
  if (!(inner_diameter > 0.0) || !(inner_length > 0.0)) {
    throw GeometryError("endcap trap: inner endcap diameter and length must be positive");
  }
  if (outer_inner_diameter <= inner_diameter) {
    throw GeometryError("endcap trap: outer endcap inner diameter must exceed the inner endcap diameter");
  }
  if (outer_outer_diameter <= outer_inner_diameter) {
    throw GeometryError("endcap trap: outer endcap outer diameter must exceed its inner diameter");
  }
  if (!(outer_cone_angle_deg > 0.0) || !(outer_cone_angle_deg < 90.0)) {
    throw GeometryError("endcap trap: outer cone angle must lie in (0, 90) degrees");
  }
  if (!(outer_separation > 0.0) || !(outer_length() > 0.0)) {
    throw GeometryError("endcap trap: outer separation and thickness must be positive");
  }
  if (!(efficiency > 0.0) || efficiency > 1.0) throw GeometryError("endcap trap: efficiency must lie in (0, 1]");
}

double EndcapTrapParams::outer_bevel_length() const {
  return 0.5 * (outer_outer_diameter - outer_inner_diameter) / std::tan(outer_cone_angle_deg * pi / 180.0);
}

double EndcapTrapParams::outer_length() const {
  if (outer_thickness) return *outer_thickness;
  return z0() + inner_length - 0.5 * outer_separation - outer_bevel_length();
}

void LinearTrapParams::validate() const {
  if (!(rod_diameter > 0.0) || !(rod_length > 0.0)) throw GeometryError("linear trap: rod dimensions must be positive");
  if (!(diagonal_separation > rod_diameter)) {
    throw GeometryError("linear trap: diagonal separation 2 r0 must exceed the rod diameter");
  }
  if (!(ring_separation > 0.0) || !(ring_diameter > 0.0) || !(ring_wire_diameter > 0.0)) {
    throw GeometryError("linear trap: ring dimensions must be positive");
  }
  if (geometric_factor && !(*geometric_factor > 0.0)) throw GeometryError("linear trap: geometric factor must be > 0");
  const double rod_reach = rod_axis_distance() + 0.5 * rod_diameter;
  const double ring_inner = 0.5 * ring_diameter;
  const double ring_half_thickness = 0.5 * ring_wire_diameter;
  const bool rings_within_rods = z0() - ring_half_thickness < 0.5 * rod_length;
  if (rings_within_rods && ring_inner <= rod_reach) {
    throw GeometryError("linear trap: endcap rings intersect the rods (ring inner radius " +
                        std::to_string(ring_inner) + " m <= rod reach " + std::to_string(rod_reach) + " m)");
  }
}

MeshOptions default_ideal_mesh(double r0, int resolution) {
  if (resolution < 4) throw GeometryError("ideal quadrupole resolution must be at least 4");
  MeshOptions m;
  m.panel_size = 4.0 * r0 / resolution;
  m.growth = 0.25;
  m.min_azimuthal = 8;
  m.max_azimuthal = 2 * resolution;
  return m;
}

MeshOptions default_endcap_mesh(const EndcapTrapParams& p) {
  MeshOptions m;
  m.panel_size = 0.024 * p.inner_diameter;
  m.growth = 0.08;
  m.max_panel_size = 2.0 * p.outer_outer_diameter;
  m.min_azimuthal = 8;
  m.max_azimuthal = 64;
  return m;
}

MeshOptions default_linear_mesh(const LinearTrapParams& p) {
  MeshOptions m;
  m.panel_size = 0.12 * p.rod_diameter;
  m.growth = 0.05;
  m.max_panel_size = 0.5 * p.ring_diameter;
  m.min_azimuthal = 8;
  m.max_azimuthal = 24;
  return m;
}

TrapGeometry build_ideal_quadrupole(double r0, const MeshOptions& options) {
  if (!(r0 > 0.0)) throw GeometryError("ideal quadrupole: r0 must be positive");
  const double z0 = r0 / std::sqrt(2.0);
  const double rmax = 3.0 * r0;
  const double ring_zmax = std::sqrt((rmax * rmax - r0 * r0) / 2.0);
  const double cap_zedge = std::sqrt(z0 * z0 + rmax * rmax / 2.0);
  const double cap_top = cap_zedge + 0.5 * r0;

  // ring: r^2 - 2 z^2 >= r0^2, r <= 3 r0
  auto ring_curve = ProfilePiece::curve([=](double s) {
    const double z = ring_zmax * (2.0 * s - 1.0);
    return ProfilePoint{std::sqrt(r0 * r0 + 2.0 * z * z), z};
  });
  RevolutionBody ring =
      make_body(axial_frame(1.0), {ring_curve, ProfilePiece::line({rmax, ring_zmax}, {rmax, -ring_zmax})});

  // endcaps: 2 z^2 - r^2 >= 2 z0^2, r <= 3 r0, |z| <= cap_top
  auto cap = [&](double direction) {
    auto curve = ProfilePiece::curve([=](double s) {
      const double r = rmax * s;
      return ProfilePoint{r, std::sqrt(z0 * z0 + 0.5 * r * r)};
    });
    return make_body(axial_frame(direction), {curve, ProfilePiece::line({rmax, cap_zedge}, {rmax, cap_top}),
                                              ProfilePiece::line({rmax, cap_top}, {0.0, cap_top}),
                                              ProfilePiece::line({0.0, cap_top}, {0.0, z0})});
  };

  return TrapGeometry::build("ideal_quadrupole",
                             {{"ring", {ring}}, {"endcap_pos", {cap(1.0)}}, {"endcap_neg", {cap(-1.0)}}}, options, r0,
                             z0);
}

TrapGeometry build_npl_endcap(const EndcapTrapParams& p, const MeshOptions& options) {
  p.validate();
  const double z0 = p.z0();
  const double a = 0.5 * p.inner_diameter;
  auto inner = [&](double direction) {
    return make_body(axial_frame(direction), polyline({{0.0, z0}, {a, z0}, {a, z0 + p.inner_length},
                                                       {0.0, z0 + p.inner_length}}));
  };

  const double rin = 0.5 * p.outer_inner_diameter;
  const double rout = 0.5 * p.outer_outer_diameter;
  const double front = 0.5 * p.outer_separation;
  const double bevel = p.outer_bevel_length();
  const double back = front + bevel + p.outer_length();
  auto outer = [&](double direction) {
    return make_body(axial_frame(direction),
                     polyline({{rin, front}, {rout, front + bevel}, {rout, back}, {rin, back}}));
  };

  return TrapGeometry::build("npl_endcap",
                             {{"inner_endcap_pos", {inner(1.0)}},
                              {"inner_endcap_neg", {inner(-1.0)}},
                              {"outer_endcap_pos", {outer(1.0)}},
                              {"outer_endcap_neg", {outer(-1.0)}}},
                             options, std::sqrt(2.0) * z0, z0);  // r0 of the equivalent ideal trap
}

TrapGeometry build_innsbruck_linear(const LinearTrapParams& p, const MeshOptions& options) {
  p.validate();
  const double d = p.rod_axis_distance();
  const double a = 0.5 * p.rod_diameter;
  const double half = 0.5 * p.rod_length;

  auto rod = [&](double x, double y) {
    Frame f;
    f.origin = {x, y, -half};
    f.axis = {0.0, 0.0, 1.0};
    f.reference = {x, y, 0.0};
    return make_body(f, polyline({{0.0, 0.0}, {a, 0.0}, {a, p.rod_length}, {0.0, p.rod_length}}));
  };

  const double w = 0.5 * p.ring_wire_diameter;
  const double rc = 0.5 * p.ring_diameter + w;
  auto ring = [&](double zc) {
    auto circle = ProfilePiece::curve([=](double s) {
      const double t = 2.0 * pi * s;
      return ProfilePoint{rc + w * std::cos(t), zc + w * std::sin(t)};
    });
    return make_body(axial_frame(1.0), {circle});
  };

  return TrapGeometry::build("innsbruck_linear",
                             {{"rf_rods", {rod(d, 0.0), rod(-d, 0.0)}},
                              {"ground_rods", {rod(0.0, d), rod(0.0, -d)}},
                              {"ring_pos", {ring(p.z0())}},
                              {"ring_neg", {ring(-p.z0())}}},
                             options, p.r0(), p.z0());
}

RevolutionBody sphere_body(const Vec3& center, double radius) {
  if (!(radius > 0.0)) throw GeometryError("sphere radius must be positive");
  Frame f;
  f.origin = center;
  auto arc = ProfilePiece::curve([=](double s) {
    const double t = pi * (s - 0.5);
    return ProfilePoint{radius * std::cos(t), radius * std::sin(t)};
  });
  return make_body(f, {arc, ProfilePiece::line({0.0, radius}, {0.0, -radius})});
}

RevolutionBody rod_body(const Frame& frame, double radius, double length) {
  if (!(radius > 0.0) || !(length > 0.0)) throw GeometryError("rod radius and length must be positive");
  return make_body(frame, polyline({{0.0, 0.0}, {radius, 0.0}, {radius, length}, {0.0, length}}));
}

RevolutionBody torus_body(const Frame& frame, double major, double minor) {
  if (!(minor > 0.0) || !(major > minor)) throw GeometryError("torus needs 0 < minor radius < major radius");
  auto circle = ProfilePiece::curve([=](double s) {
    const double t = 2.0 * pi * s;
    return ProfilePoint{major + minor * std::cos(t), minor * std::sin(t)};
  });
  return make_body(frame, {circle});
}

RevolutionBody washer_body(const Frame& frame, double inner_radius, double outer_radius, double thickness) {
  if (inner_radius < 0.0 || !(outer_radius > inner_radius) || !(thickness > 0.0)) {
    throw GeometryError("washer needs 0 <= inner radius < outer radius and a positive thickness");
  }
  return make_body(frame, polyline({{inner_radius, 0.0}, {outer_radius, 0.0}, {outer_radius, thickness},
                                    {inner_radius, thickness}}));
}

void write_panels_csv(std::ostream& os, const TrapGeometry& g) {
  os << "electrode_id,cx,cy,cz,nx,ny,nz,area\n";
  os << std::setprecision(10);
  for (const auto& p : g.panels()) {
    os << p.electrode_id << ',' << p.centroid.x << ',' << p.centroid.y << ',' << p.centroid.z << ',' << p.normal.x
       << ',' << p.normal.y << ',' << p.normal.z << ',' << p.area << '\n';
  }
}

} // namespace iontrap
