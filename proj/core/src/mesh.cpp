#include "iontrap/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "iontrap/constants.hpp"
#include "iontrap/error.hpp"

namespace iontrap {
namespace {

using constants::pi;

struct Basis {
  Vec3 origin;
  Vec3 w;  // axis
  Vec3 u;  // azimuth zero
  Vec3 v;
};

Basis make_basis(const Frame& f) {
  Basis b;
  b.origin = f.origin;
  if (norm(f.axis) == 0.0) throw GeometryError("frame axis has zero length");
  b.w = normalized(f.axis);
  Vec3 u = f.reference - dot(f.reference, b.w) * b.w;
  if (norm(u) < 1e-12) {
    // reference parallel to axis: fall back to the coordinate axis least aligned with it
    const Vec3 ex{1, 0, 0}, ey{0, 1, 0};
    const Vec3 pick = std::abs(b.w.x) < 0.9 ? ex : ey;
    u = pick - dot(pick, b.w) * b.w;
  }
  b.u = normalized(u);
  b.v = cross(b.w, b.u);
  return b;
}

Vec3 radial(const Basis& b, double phi) { return std::cos(phi) * b.u + std::sin(phi) * b.v; }

Vec3 place(const Basis& b, ProfilePoint q, double phi) {
  return b.origin + q.zeta * b.w + q.rho * radial(b, phi);
}

double signed_area(std::span<const ProfilePoint> poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    a += p.rho * q.zeta - q.rho * p.zeta;
  }
  return 0.5 * a;
}

std::vector<ProfilePoint> raw_polygon(const RevolutionBody& body, int per_piece) {
  std::vector<ProfilePoint> out;
  for (const auto& piece : body.pieces) {
    const int n = piece.is_line() ? 1 : per_piece;
    for (int k = 0; k < n; ++k) out.push_back(piece.at(static_cast<double>(k) / n));
  }
  return out;
}

// Emits the ring of panels swept by the meridian segment a -> b. `orientation`
// is +1 when the profile runs counter-clockwise (outward normal (dzeta, -drho)).
void revolve_band(const Basis& b, ProfilePoint a, ProfilePoint c, int n_around, double orientation,
                  int electrode_id, std::vector<Panel>& out) {
  const double seg = std::hypot(c.rho - a.rho, c.zeta - a.zeta);
  if (seg == 0.0) return;
  const double axis_tol = 1e-12 * seg;
  const bool a_axis = a.rho <= axis_tol;
  const bool c_axis = c.rho <= axis_tol;
  if (a_axis && c_axis) return;

  const double n_rho = orientation * (c.zeta - a.zeta);
  const double n_zeta = -orientation * (c.rho - a.rho);

  for (int k = 0; k < n_around; ++k) {
    const double phi0 = 2.0 * pi * k / n_around;
    const double phi1 = 2.0 * pi * (k + 1) / n_around;
    const double phim = 0.5 * (phi0 + phi1);
    const Vec3 hint = n_rho * radial(b, phim) + n_zeta * b.w;
    if (a_axis) {
      const std::array<Vec3, 3> v{place(b, {0.0, a.zeta}, 0.0), place(b, c, phi0), place(b, c, phi1)};
      out.push_back(Panel::make(v, hint, electrode_id));
    } else if (c_axis) {
      const std::array<Vec3, 3> v{place(b, a, phi0), place(b, a, phi1), place(b, {0.0, c.zeta}, 0.0)};
      out.push_back(Panel::make(v, hint, electrode_id));
    } else {
      const std::array<Vec3, 4> v{place(b, a, phi0), place(b, a, phi1), place(b, c, phi1), place(b, c, phi0)};
      out.push_back(Panel::make(v, hint, electrode_id));
    }
  }
}

int round_up_to_multiple_of_4(int n) { return ((n + 3) / 4) * 4; }

// Parameters s_0 = 0 < ... < s_k = 1 along a piece such that each interval is
// about one local panel size long.
std::vector<double> graded_nodes(const ProfilePiece& piece, const MeshOptions& opt, ProfilePoint refine) {
  constexpr int samples = 256;
  std::vector<double> s(samples + 1), integral(samples + 1, 0.0);
  std::vector<ProfilePoint> pts(samples + 1);
  for (int i = 0; i <= samples; ++i) {
    s[i] = static_cast<double>(i) / samples;
    pts[i] = piece.at(s[i]);
  }
  auto inv_size = [&](const ProfilePoint& p) {
    return 1.0 / opt.meridian_size(p.rho, opt.size_at(std::hypot(p.rho - refine.rho, p.zeta - refine.zeta)));
  };
  for (int i = 1; i <= samples; ++i) {
    const double dl = std::hypot(pts[i].rho - pts[i - 1].rho, pts[i].zeta - pts[i - 1].zeta);
    integral[i] = integral[i - 1] + 0.5 * dl * (inv_size(pts[i]) + inv_size(pts[i - 1]));
  }
  const double total = integral.back();
  constexpr int min_curve_divisions = 12;
  const int n = std::max(piece.is_line() ? 1 : min_curve_divisions, static_cast<int>(std::ceil(total - 1e-9)));
  std::vector<double> nodes{0.0};
  int j = 1;
  for (int k = 1; k < n; ++k) {
    const double target = total * k / n;
    while (j < samples && integral[j] < target) ++j;
    const double span = integral[j] - integral[j - 1];
    const double f = span > 0.0 ? (target - integral[j - 1]) / span : 0.0;
    nodes.push_back(s[j - 1] + f * (s[j] - s[j - 1]));
  }
  nodes.push_back(1.0);
  return nodes;
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw GeometryError(std::string("degenerate primitive: ") + what + " must be positive, got " +
                        std::to_string(v));
  }
}

void require_resolution(Resolution r) {
  if (r.around < 2 || r.along < 2) {
    throw GeometryError("resolution must be at least 2 panels per direction, got " + std::to_string(r.around) +
                        "x" + std::to_string(r.along));
  }
}

// Fixed-resolution sweep of an open meridian curve (orientation +1).
std::vector<Panel> sweep(const Frame& frame, const ProfilePiece& piece, Resolution r, int electrode_id) {
  const Basis b = make_basis(frame);
  std::vector<Panel> out;
  out.reserve(static_cast<std::size_t>(r.around) * r.along);
  for (int i = 0; i < r.along; ++i) {
    revolve_band(b, piece.at(static_cast<double>(i) / r.along), piece.at(static_cast<double>(i + 1) / r.along),
                 r.around, 1.0, electrode_id, out);
  }
  return out;
}

} // namespace

Panel Panel::make(std::span<const Vec3> verts, const Vec3& outward_hint, int electrode_id) {
  if (verts.size() != 3 && verts.size() != 4) throw GeometryError("panel needs 3 or 4 vertices");
  Panel p;
  p.vertex_count = static_cast<int>(verts.size());
  std::copy(verts.begin(), verts.end(), p.vertices.begin());
  Vec3 sum{};
  for (const auto& v : verts) sum += v;
  p.centroid = sum / static_cast<double>(verts.size());

  const Vec3 n = p.vertex_count == 4 ? cross(verts[2] - verts[0], verts[3] - verts[1])
                                     : cross(verts[1] - verts[0], verts[2] - verts[0]);
  const double len = norm(n);
  if (!(len > 0.0)) throw GeometryError("degenerate panel with zero area");
  p.area = 0.5 * len;
  p.normal = n / len;
  if (dot(p.normal, outward_hint) < 0.0) {
    std::reverse(p.vertices.begin(), p.vertices.begin() + p.vertex_count);
    p.normal = -p.normal;
  }
  p.electrode_id = electrode_id;
  return p;
}

double Panel::diameter() const {
  double d2 = 0.0;
  for (int i = 0; i < vertex_count; ++i)
    for (int j = i + 1; j < vertex_count; ++j) d2 = std::max(d2, norm2(vertices[i] - vertices[j]));
  return std::sqrt(d2);
}

std::array<QuadraturePoint, 4> subdivide(const Panel& panel) {
  const auto& v = panel.vertices;
  std::array<QuadraturePoint, 4> q{};
  if (panel.vertex_count == 3) {
    const Vec3 m01 = 0.5 * (v[0] + v[1]), m12 = 0.5 * (v[1] + v[2]), m20 = 0.5 * (v[2] + v[0]);
    const double w = panel.area / 4.0;
    q[0] = {(v[0] + m01 + m20) / 3.0, w};
    q[1] = {(m01 + v[1] + m12) / 3.0, w};
    q[2] = {(m20 + m12 + v[2]) / 3.0, w};
    q[3] = {(m01 + m12 + m20) / 3.0, w};
    return q;
  }
  const Vec3 m01 = 0.5 * (v[0] + v[1]), m12 = 0.5 * (v[1] + v[2]);
  const Vec3 m23 = 0.5 * (v[2] + v[3]), m30 = 0.5 * (v[3] + v[0]);
  const Vec3 c = 0.25 * (v[0] + v[1] + v[2] + v[3]);
  const std::array<std::array<Vec3, 4>, 4> sub{{{v[0], m01, c, m30}, {m01, v[1], m12, c}, {c, m12, v[2], m23},
                                                {m30, c, m23, v[3]}}};
  for (int k = 0; k < 4; ++k) {
    const auto& s = sub[k];
    q[k].position = 0.25 * (s[0] + s[1] + s[2] + s[3]);
    q[k].weight = 0.5 * norm(cross(s[2] - s[0], s[3] - s[1]));
  }
  return q;
}

ProfilePiece ProfilePiece::line(ProfilePoint a, ProfilePoint b) {
  ProfilePiece p;
  p.fn_ = [a, b](double s) { return ProfilePoint{a.rho + s * (b.rho - a.rho), a.zeta + s * (b.zeta - a.zeta)}; };
  p.is_line_ = true;
  return p;
}

ProfilePiece ProfilePiece::curve(std::function<ProfilePoint(double)> f) {
  ProfilePiece p;
  p.fn_ = std::move(f);
  return p;
}

ProfilePoint RevolutionBody::to_profile(const Vec3& p) const {
  const Basis b = make_basis(frame);
  const Vec3 d = p - b.origin;
  const double zeta = dot(d, b.w);
  return {norm(d - zeta * b.w), zeta};
}

Vec3 RevolutionBody::to_global(const ProfilePoint& q, double phi) const { return place(make_basis(frame), q, phi); }

std::vector<ProfilePoint> RevolutionBody::polygon(int per_piece) const {
  auto poly = raw_polygon(*this, per_piece);
  // Arc endpoints on the axis come out as ~1e-17 rather than 0.
  double extent = 0.0;
  for (const auto& q : poly) extent = std::max({extent, std::abs(q.rho), std::abs(q.zeta)});
  for (auto& q : poly)
    if (std::abs(q.rho) < 1e-12 * extent) q.rho = 0.0;
  if (signed_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
  return poly;
}

bool point_in_polygon(std::span<const ProfilePoint> poly, ProfilePoint q) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.zeta > q.zeta) != (b.zeta > q.zeta)) {
      const double rho_cross = a.rho + (q.zeta - a.zeta) * (b.rho - a.rho) / (b.zeta - a.zeta);
      if (q.rho < rho_cross) inside = !inside;
    }
  }
  return inside;
}

bool RevolutionBody::contains(const Vec3& p) const {
  const auto poly = polygon();
  return point_in_polygon(poly, to_profile(p));
}

double MeshOptions::size_at(double distance) const {
  return std::min(max_panel_size, panel_size + growth * distance);
}

int MeshOptions::azimuthal_count(double rho, double size) const {
  const int n = static_cast<int>(std::ceil(2.0 * pi * rho / size));
  return round_up_to_multiple_of_4(std::clamp(n, min_azimuthal, max_azimuthal));
}

double MeshOptions::meridian_size(double rho, double size) const {
  const double width = 2.0 * pi * rho / azimuthal_count(rho, size);
  return std::max(0.25 * size, std::min(size, max_aspect * width));
}

std::vector<Panel> mesh_body(const RevolutionBody& body, const MeshOptions& opt, int electrode_id) {
  require_positive(opt.panel_size, "panel_size");
  if (body.pieces.empty()) throw GeometryError("body has no profile");
  const Basis b = make_basis(body.frame);
  const double orientation = signed_area(raw_polygon(body, 48)) >= 0.0 ? 1.0 : -1.0;
  const ProfilePoint refine = body.to_profile(opt.refine_point);

  std::vector<Panel> out;
  for (const auto& piece : body.pieces) {
    const auto nodes = graded_nodes(piece, opt, refine);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
      const ProfilePoint a = piece.at(nodes[i]);
      const ProfilePoint c = piece.at(nodes[i + 1]);
      const double d = std::min(std::hypot(a.rho - refine.rho, a.zeta - refine.zeta),
                                std::hypot(c.rho - refine.rho, c.zeta - refine.zeta));
      revolve_band(b, a, c, opt.azimuthal_count(std::max(a.rho, c.rho), opt.size_at(d)), orientation, electrode_id,
                   out);
    }
  }
  return out;
}

std::vector<Panel> mesh_surface(const Primitive& primitive, Resolution r, int electrode_id) {
  require_resolution(r);
  return std::visit(
      [&](const auto& prim) -> std::vector<Panel> {
        using T = std::decay_t<decltype(prim)>;
        if constexpr (std::is_same_v<T, Cylinder>) {
          require_positive(prim.radius, "cylinder radius");
          require_positive(prim.length, "cylinder length");
          return sweep(prim.frame, ProfilePiece::line({prim.radius, 0.0}, {prim.radius, prim.length}), r,
                       electrode_id);
        } else if constexpr (std::is_same_v<T, AnnularDisc>) {
          require_positive(prim.outer_radius, "annulus outer radius");
          if (prim.inner_radius < 0.0 || prim.inner_radius >= prim.outer_radius) {
            throw GeometryError("degenerate primitive: annulus needs 0 <= inner radius < outer radius");
          }
          return sweep(prim.frame, ProfilePiece::line({prim.outer_radius, 0.0}, {prim.inner_radius, 0.0}), r,
                       electrode_id);
        } else if constexpr (std::is_same_v<T, ConeFrustum>) {
          require_positive(prim.length, "cone length");
          if (prim.radius_start < 0.0 || prim.radius_end < 0.0 ||
              prim.radius_start + prim.radius_end <= 0.0) {
            throw GeometryError("degenerate primitive: cone frustum radii must be non-negative, not both zero");
          }
          return sweep(prim.frame,
                       ProfilePiece::line({prim.radius_start, 0.0}, {prim.radius_end, prim.length}), r,
                       electrode_id);
        } else if constexpr (std::is_same_v<T, Sphere>) {
          require_positive(prim.radius, "sphere radius");
          const double radius = prim.radius;
          Frame f;
          f.origin = prim.center;
          return sweep(f, ProfilePiece::curve([radius](double s) {
                         const double theta = pi * s;
                         return ProfilePoint{radius * std::sin(theta), -radius * std::cos(theta)};
                       }),
                       r, electrode_id);
        } else {
          const Vec3 n = cross(prim.edge_u, prim.edge_v);
          if (!(norm(n) > 0.0)) throw GeometryError("degenerate primitive: rectangle edges are parallel or zero");
          std::vector<Panel> out;
          out.reserve(static_cast<std::size_t>(r.around) * r.along);
          for (int i = 0; i < r.around; ++i) {
            for (int j = 0; j < r.along; ++j) {
              auto at = [&](int a, int c) {
                return prim.corner + (static_cast<double>(a) / r.around) * prim.edge_u +
                       (static_cast<double>(c) / r.along) * prim.edge_v;
              };
              const std::array<Vec3, 4> v{at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};
              out.push_back(Panel::make(v, n, electrode_id));
            }
          }
          return out;
        }
      },
      primitive);
}

double surface_area(const Primitive& primitive) {
  return std::visit(
      [](const auto& prim) -> double {
        using T = std::decay_t<decltype(prim)>;
        if constexpr (std::is_same_v<T, Cylinder>) {
          return 2.0 * pi * prim.radius * prim.length;
        } else if constexpr (std::is_same_v<T, AnnularDisc>) {
          return pi * (prim.outer_radius * prim.outer_radius - prim.inner_radius * prim.inner_radius);
        } else if constexpr (std::is_same_v<T, ConeFrustum>) {
          const double dr = prim.radius_end - prim.radius_start;
          return pi * (prim.radius_start + prim.radius_end) * std::hypot(dr, prim.length);
        } else if constexpr (std::is_same_v<T, Sphere>) {
          return 4.0 * pi * prim.radius * prim.radius;
        } else {
          return norm(cross(prim.edge_u, prim.edge_v));
        }
      },
      primitive);
}

} // namespace iontrap
