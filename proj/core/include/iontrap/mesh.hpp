#pragma once

#include <array>
#include <functional>
#include <limits>
#include <span>
#include <variant>
#include <vector>

#include "iontrap/vec3.hpp"

namespace iontrap {

/// Flat triangle or quadrilateral carrying a constant surface charge density.
struct Panel {
  std::array<Vec3, 4> vertices{};
  int vertex_count = 0;
  Vec3 centroid;
  Vec3 normal;  // unit, pointing out of the conductor
  double area = 0.0;
  int electrode_id = 0;

  /// Builds a panel from 3 or 4 coplanar vertices. The vertex winding is
  /// flipped if needed so that the normal agrees with `outward_hint`.
  static Panel make(std::span<const Vec3> verts, const Vec3& outward_hint, int electrode_id);

  std::span<const Vec3> corners() const { return {vertices.data(), static_cast<std::size_t>(vertex_count)}; }

  /// Largest vertex-to-vertex distance.
  double diameter() const;
};

struct QuadraturePoint {
  Vec3 position;
  double weight = 0.0;  // area represented by the point
};

/// Splits a panel into four sub-panels (midpoint subdivision) and returns
/// their centroids weighted by sub-panel area.
std::array<QuadraturePoint, 4> subdivide(const Panel& panel);

/// Local frame for solids of revolution: `axis` is the symmetry axis and
/// `reference` fixes azimuth zero. Both are normalized on use.
struct Frame {
  Vec3 origin{};
  Vec3 axis{0.0, 0.0, 1.0};
  Vec3 reference{1.0, 0.0, 0.0};
};

/// (rho, zeta) coordinates in a Frame: distance from axis and position along it.
struct ProfilePoint {
  double rho = 0.0;
  double zeta = 0.0;
  friend bool operator==(const ProfilePoint&, const ProfilePoint&) = default;
};

/// One piece of a meridian profile, parametrized on s in [0, 1].
class ProfilePiece {
 public:
  static ProfilePiece line(ProfilePoint a, ProfilePoint b);
  static ProfilePiece curve(std::function<ProfilePoint(double)> f);

  ProfilePoint at(double s) const { return fn_(s); }
  bool is_line() const { return is_line_; }

 private:
  std::function<ProfilePoint(double)> fn_;
  bool is_line_ = false;
};

/// Closed solid of revolution: the pieces chain end-to-start and enclose the
/// conductor cross-section in the (rho, zeta) half plane. Pieces lying on the
/// axis carry no surface and are skipped by the mesher.
struct RevolutionBody {
  Frame frame;
  std::vector<ProfilePiece> pieces;

  /// Point-in-solid test against a polygonal approximation of the profile.
  bool contains(const Vec3& p) const;

  /// Local cylindrical coordinates of a global point.
  ProfilePoint to_profile(const Vec3& p) const;
  Vec3 to_global(const ProfilePoint& q, double phi) const;

  /// Profile polygon sampled with `per_piece` points per piece, oriented
  /// counter-clockwise in the (rho, zeta) plane.
  std::vector<ProfilePoint> polygon(int per_piece = 48) const;
};

/// Crossing-number test in the (rho, zeta) half plane.
bool point_in_polygon(std::span<const ProfilePoint> polygon, ProfilePoint q);

/// Size field for adaptive meshing: panels are `panel_size` wide at
/// `refine_point` and grow linearly with distance from it.
struct MeshOptions {
  double panel_size = 0.0;
  double growth = 0.0;
  double max_panel_size = std::numeric_limits<double>::infinity();
  int min_azimuthal = 8;
  int max_azimuthal = 64;
  double max_aspect = 2.0;  // meridian length / azimuthal width, away from the axis
  Vec3 refine_point{};

  double size_at(double distance) const;
  int azimuthal_count(double rho, double size) const;
  /// Meridian panel length at profile radius rho for local size `size`.
  double meridian_size(double rho, double size) const;
};

/// Meshes a closed body with the adaptive size field.
std::vector<Panel> mesh_body(const RevolutionBody& body, const MeshOptions& options, int electrode_id);

// ---- canonical primitives (fixed resolution) -------------------------------

/// Lateral surface of a cylinder from frame.origin along frame.axis.
struct Cylinder {
  double radius = 0.0;
  double length = 0.0;
  Frame frame;
};

/// Flat annulus in the plane through frame.origin normal to frame.axis.
struct AnnularDisc {
  double inner_radius = 0.0;
  double outer_radius = 0.0;
  Frame frame;
};

/// Lateral surface of a cone frustum from radius_start at the origin to
/// radius_end at `length` along the axis.
struct ConeFrustum {
  double radius_start = 0.0;
  double radius_end = 0.0;
  double length = 0.0;
  Frame frame;
};

struct Sphere {
  double radius = 0.0;
  Vec3 center{};
};

/// Parallelogram spanned by edge_u and edge_v from corner.
struct Rectangle {
  Vec3 corner{};
  Vec3 edge_u{};
  Vec3 edge_v{};
};

using Primitive = std::variant<Cylinder, AnnularDisc, ConeFrustum, Sphere, Rectangle>;

/// Panels per direction. For solids of revolution `around` is azimuthal and
/// `along` follows the meridian; for a sphere `along` counts latitude bands.
struct Resolution {
  int around = 0;
  int along = 0;
};

/// Tiles one primitive surface. Throws GeometryError on degenerate input.
std::vector<Panel> mesh_surface(const Primitive& primitive, Resolution resolution, int electrode_id = 0);

/// Analytic surface area of a primitive, for convergence checks.
double surface_area(const Primitive& primitive);

} // namespace iontrap
