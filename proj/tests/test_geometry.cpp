#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "iontrap/error.hpp"
#include "iontrap/geometry.hpp"
#include "support/generators.hpp"

using namespace iontrap;
using doctest::Approx;

namespace {

constexpr double pi = 3.14159265358979323846;

double total_area(const std::vector<Panel>& panels) {
  double a = 0;
  for (const auto& p : panels) a += p.area;
  return a;
}

std::vector<double> electrode_areas(const TrapGeometry& g) {
  std::vector<double> out(g.electrode_count(), 0.0);
  for (const auto& p : g.panels()) out[p.electrode_id] += p.area;
  return out;
}

void check_panel_invariants(const std::vector<Panel>& panels) {
  for (const auto& p : panels) {
    REQUIRE((p.vertex_count == 3 || p.vertex_count == 4));
    CHECK(p.area > 0.0);
    CHECK(std::abs(norm(p.normal) - 1.0) < 1e-12);
    Vec3 mean{};
    for (const auto& v : p.corners()) mean += v;
    mean = mean / p.vertex_count;
    CHECK(norm(mean - p.centroid) <= 1e-12 * p.diameter());
  }
}

// Every centroid of `a`, mapped by `f`, has a partner in `b` within `tol`.
template <class F>
bool mapped_onto(const std::vector<Vec3>& a, const std::vector<Vec3>& b, F f, double tol) {
  for (const auto& p : a) {
    const Vec3 q = f(p);
    const bool hit = std::any_of(b.begin(), b.end(), [&](const Vec3& c) { return norm(c - q) < tol; });
    if (!hit) return false;
  }
  return true;
}

std::vector<Vec3> centroids_of(const TrapGeometry& g, int electrode) {
  std::vector<Vec3> out;
  for (const auto& p : g.panels())
    if (p.electrode_id == electrode) out.push_back(p.centroid);
  return out;
}

} // namespace

TEST_CASE("primitive areas") {
  const auto cyl = mesh_surface(Cylinder{1.0, 1.0, {}}, {32, 32});
  CHECK(cyl.size() == 32 * 32);
  CHECK(total_area(cyl) == Approx(2 * pi).epsilon(0.01));
  check_panel_invariants(cyl);

  const auto ann = mesh_surface(AnnularDisc{0.5, 1.0, {}}, {32, 16});
  CHECK(total_area(ann) == Approx(pi * 0.75).epsilon(0.01));
  CHECK(total_area(ann) == Approx(2.356).epsilon(0.01));
  check_panel_invariants(ann);

  const auto sph = mesh_surface(Sphere{1.0, {}}, {64, 32});
  CHECK(sph.size() >= 2048);
  CHECK(total_area(sph) == Approx(4 * pi).epsilon(0.01));
  check_panel_invariants(sph);

  const ConeFrustum cone{0.5, 1.0, 2.0, {}};
  CHECK(total_area(mesh_surface(cone, {48, 24})) == Approx(surface_area(cone)).epsilon(0.01));

  const auto rect = mesh_surface(Rectangle{{0, 0, 0}, {2, 0, 0}, {0, 3, 0}}, {4, 6});
  CHECK(total_area(rect) == Approx(6.0).epsilon(1e-12));
}

TEST_CASE("primitive areas converge") {
  for (const Primitive& prim : {Primitive{Cylinder{0.3, 2.0, {}}}, Primitive{Sphere{2.0, {}}},
                                Primitive{ConeFrustum{1.0, 0.2, 0.7, {}}}, Primitive{AnnularDisc{0.1, 1.0, {}}}}) {
    double prev_err = 1e300;
    for (int n : {8, 16, 32, 64}) {
      const double err = std::abs(total_area(mesh_surface(prim, {n, n})) / surface_area(prim) - 1.0);
      CHECK(err <= prev_err + 1e-15);
      prev_err = err;
    }
    CHECK(prev_err < 0.005);
  }
}

TEST_CASE("degenerate primitives are rejected") {
  CHECK_THROWS_AS(mesh_surface(Cylinder{0.0, 1.0, {}}, {8, 8}), GeometryError);
  CHECK_THROWS_AS(mesh_surface(Cylinder{1.0, 0.0, {}}, {8, 8}), GeometryError);
  CHECK_THROWS_AS(mesh_surface(AnnularDisc{1.0, 0.5, {}}, {8, 8}), GeometryError);
  CHECK_THROWS_AS(mesh_surface(Sphere{0.0, {}}, {8, 8}), GeometryError);
  CHECK_THROWS_AS(mesh_surface(Sphere{1.0, {}}, {1, 8}), GeometryError);
  CHECK_THROWS_AS(mesh_surface(Rectangle{{}, {1, 0, 0}, {2, 0, 0}}, {4, 4}), GeometryError);
}

TEST_CASE("outward normals on convex bodies") {
  for (const auto& p : mesh_surface(Sphere{1.5, {1, 2, 3}}, {24, 12})) CHECK(dot(p.centroid - Vec3{1, 2, 3}, p.normal) > 0);
  const auto body = sphere_body({0, 0, 1}, 0.5);
  MeshOptions m;
  m.panel_size = 0.05;
  for (const auto& p : mesh_body(body, m, 0)) CHECK(dot(p.centroid - Vec3{0, 0, 1}, p.normal) > 0);
  const auto rod = rod_body(Frame{{0, 0, -1}, {0, 0, 1}, {1, 0, 0}}, 0.2, 2.0);
  for (const auto& p : mesh_body(rod, m, 0)) {
    // closed convex cylinder centred at the origin
    CHECK(dot(p.centroid, p.normal) > 0);
  }
}

TEST_CASE("ideal quadrupole") {
  const auto g = build_ideal_quadrupole(1e-3);
  CHECK(g.z0() == Approx(1e-3 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(g.z0() == Approx(0.7071e-3).epsilon(1e-4));
  CHECK(build_ideal_quadrupole(2e-3, 8).z0() == Approx(1.4142e-3).epsilon(1e-4));
  REQUIRE(g.electrode_count() == 3);
  CHECK(g.electrodes()[0].label == "ring");
  CHECK(g.electrodes()[1].label == "endcap_pos");
  CHECK(g.electrodes()[2].label == "endcap_neg");
  check_panel_invariants(g.panels());
  g.check_no_overlap();

  const double r0 = 1e-3;
  int hyperbolic = 0;
  for (const auto& p : g.panels()) {
    if (p.electrode_id != 0) continue;
    bool on_curve = true;
    for (const auto& v : p.corners()) {
      const double r = std::hypot(v.x, v.y);
      const double hyp = std::abs(r * r - 2 * v.z * v.z - r0 * r0) / (r0 * r0);
      CHECK(std::min(hyp, std::abs(r - 3 * r0) / r0) < 1e-9);
      on_curve = on_curve && hyp < 1e-9;
    }
    if (on_curve) ++hyperbolic;
  }
  CHECK(hyperbolic > 100);
  CHECK_THROWS_AS(build_ideal_quadrupole(0.0), GeometryError);
  CHECK_THROWS_AS(build_ideal_quadrupole(1e-3, 2), GeometryError);
}

TEST_CASE("NPL endcap trap") {
  const EndcapTrapParams p;
  CHECK(p.z0() == Approx(0.28e-3));
  CHECK(0.5 * (p.outer_outer_diameter - p.outer_inner_diameter) == Approx(0.5e-3));
  const auto g = build_npl_endcap(p);
  CHECK(g.z0() == Approx(0.28e-3));
  REQUIRE(g.electrode_count() == 4);
  check_panel_invariants(g.panels());
  g.check_no_overlap();

  auto mirror = [](Vec3 v) { return Vec3{v.x, v.y, -v.z}; };
  CHECK(mapped_onto(centroids_of(g, 0), centroids_of(g, 1), mirror, 1e-12));
  CHECK(mapped_onto(centroids_of(g, 2), centroids_of(g, 3), mirror, 1e-12));

  CHECK(g.electrode_containing({0, 0, 0.5e-3}) == 0);
  CHECK(g.electrode_containing({0, 0, -0.5e-3}) == 1);
  CHECK(g.electrode_containing({0.75e-3, 0, 2e-3}) == 2);
  CHECK_FALSE(g.electrode_containing({0, 0, 0}).has_value());

  EndcapTrapParams bad = p;
  bad.outer_inner_diameter = p.inner_diameter;
  CHECK_THROWS_AS(build_npl_endcap(bad), GeometryError);
  bad = p;
  bad.efficiency = 1.2;
  CHECK_THROWS_AS(bad.validate(), GeometryError);
  bad = p;
  bad.inner_separation = 0;
  CHECK_THROWS_AS(bad.validate(), GeometryError);

  EndcapTrapParams frustum = p;
  frustum.outer_thickness = 0.5e-3;
  CHECK(frustum.outer_length() == 0.5e-3);
  CHECK(build_npl_endcap(frustum).panels().size() < g.panels().size());
}

TEST_CASE("Innsbruck linear trap") {
  const LinearTrapParams p;
  CHECK(p.r0() == Approx(1.2e-3));
  CHECK(p.z0() == Approx(5e-3));
  CHECK(p.rod_axis_distance() == Approx(1.5e-3));
  const auto g = build_innsbruck_linear(p);
  REQUIRE(g.electrode_count() == 4);
  check_panel_invariants(g.panels());
  g.check_no_overlap();

  CHECK(g.electrode_containing({1.5e-3, 0, 0}) == 0);
  CHECK(g.electrode_containing({-1.5e-3, 0, 1e-3}) == 0);
  CHECK(g.electrode_containing({0, 1.5e-3, 0}) == 1);
  CHECK(g.electrode_containing({3.5e-3, 0, 5e-3}) == 2);
  CHECK(g.electrode_containing({0, -3.5e-3, -5e-3}) == 3);

  auto rot = [](Vec3 v) { return Vec3{-v.y, v.x, v.z}; };
  CHECK(mapped_onto(centroids_of(g, 0), centroids_of(g, 1), rot, 1e-12));
  CHECK(mapped_onto(centroids_of(g, 1), centroids_of(g, 0), rot, 1e-12));

  LinearTrapParams bad = p;
  bad.ring_diameter = 3e-3;
  CHECK_THROWS_AS(build_innsbruck_linear(bad), GeometryError);
  bad = p;
  bad.diagonal_separation = 0.5e-3;
  CHECK_THROWS_AS(bad.validate(), GeometryError);
  bad = p;
  bad.geometric_factor = -0.1;
  CHECK_THROWS_AS(bad.validate(), GeometryError);
}

TEST_CASE("electrode areas converge under refinement") {
  auto rel_change = [](const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(b[i] / a[i] - 1.0));
    return worst;
  };
  CHECK(rel_change(electrode_areas(build_ideal_quadrupole(1e-3, 32)), electrode_areas(build_ideal_quadrupole(1e-3, 64))) <
        0.005);

  auto refine = [](MeshOptions m) {
    m.panel_size *= 0.5;
    m.growth *= 0.5;
    m.max_panel_size *= 0.5;
    m.min_azimuthal *= 2;
    m.max_azimuthal *= 2;
    return m;
  };

  // Successive doublings shrink the change; the finest one is under 0.5%.
  auto ladder = [&](auto build, MeshOptions m, int levels) {
    std::vector<std::vector<double>> areas;
    for (int k = 0; k < levels; ++k, m = refine(m)) areas.push_back(electrode_areas(build(m)));
    double prev = 1e300;
    for (int k = 1; k < levels; ++k) {
      const double c = rel_change(areas[k - 1], areas[k]);
      CHECK(c < prev);
      prev = c;
    }
    CHECK(prev < 0.005);
  };
  const EndcapTrapParams ep;
  ladder([&](const MeshOptions& m) { return build_npl_endcap(ep, m); }, default_endcap_mesh(ep), 3);
  const LinearTrapParams lp;
  ladder([&](const MeshOptions& m) { return build_innsbruck_linear(lp, m); }, default_linear_mesh(lp), 4);
}

TEST_CASE("builders are deterministic") {
  auto same = [](const TrapGeometry& a, const TrapGeometry& b) {
    if (a.panels().size() != b.panels().size()) return false;
    for (std::size_t i = 0; i < a.panels().size(); ++i) {
      const auto &p = a.panels()[i], &q = b.panels()[i];
      if (p.electrode_id != q.electrode_id || p.area != q.area || p.vertex_count != q.vertex_count) return false;
      for (int k = 0; k < p.vertex_count; ++k)
        if (!(p.vertices[k] == q.vertices[k])) return false;
    }
    return true;
  };
  CHECK(same(build_ideal_quadrupole(1e-3, 16), build_ideal_quadrupole(1e-3, 16)));
  CHECK(same(build_npl_endcap(), build_npl_endcap()));
  CHECK(same(build_innsbruck_linear(), build_innsbruck_linear()));
}

TEST_CASE("point-in-solid property") {
  gen::Source src(41);
  for (int n = 0; n < gen::default_cases; ++n) {
    const Vec3 c = src.in_ball(1.0);
    const double r = src.uniform(0.1, 1.0);
    const auto body = sphere_body(c, r);
    const Vec3 dir = src.unit_vector();
    CHECK(body.contains(c + 0.9 * r * dir));
    CHECK_FALSE(body.contains(c + 1.1 * r * dir));
  }
}

TEST_CASE("panel CSV") {
  const auto g = build_ideal_quadrupole(1e-3, 8);
  std::ostringstream os;
  write_panels_csv(os, g);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "electrode_id,cx,cy,cz,nx,ny,nz,area");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == g.panels().size());
}
