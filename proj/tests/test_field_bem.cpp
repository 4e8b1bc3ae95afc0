#include <cmath>
#include <map>
#include <memory>

#include "doctest.h"
#include "iontrap/drive.hpp"
#include "iontrap/error.hpp"
#include "iontrap/field_bem.hpp"
#include "iontrap/geometry.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace iontrap;
using doctest::Approx;

namespace {

Panel square(const Vec3& origin, double w, double h, int electrode = 0) {
  const Vec3 v[] = {origin, origin + Vec3{w, 0, 0}, origin + Vec3{w, h, 0}, origin + Vec3{0, h, 0}};
  return Panel::make(v, {0, 0, 1}, electrode);
}

std::vector<Panel> sphere_panels(double r, int around, int along, int electrode) {
  auto panels = mesh_surface(Sphere{r, {}}, {around, along});
  for (auto& p : panels) p.electrode_id = electrode;
  return panels;
}

std::shared_ptr<const TrapGeometry> unit_sphere(int around = 64, int along = 32) {
  return std::make_shared<const TrapGeometry>(
      TrapGeometry::from_panels("sphere", sphere_panels(1.0, around, along, 0), {"sphere"}, 1.0, 1.0));
}

// Cached solves shared by several cases.
std::shared_ptr<BemField> sphere_field() {
  static const auto f = BemField::solve(unit_sphere());
  return f;
}

std::shared_ptr<BemField> ideal_field(int resolution) {
  static std::map<int, std::shared_ptr<BemField>> cache;
  auto& f = cache[resolution];
  if (!f) f = BemField::solve(std::make_shared<const TrapGeometry>(build_ideal_quadrupole(1e-3, resolution)));
  return f;
}

// Ring at v, endcaps grounded; Phi = v (2 z0^2 + r^2 - 2 z^2) / (r0^2 + 2 z0^2).
double ideal_phi(const Vec3& p, double v, double r0) {
  const double z0 = r0 / std::sqrt(2.0);
  return v * (2 * z0 * z0 + p.x * p.x + p.y * p.y - 2 * p.z * p.z) / (r0 * r0 + 2 * z0 * z0);
}

// Every panel lies at least `k` of its own diameters from p.
bool clear_of_panels(const TrapGeometry& g, const Vec3& p, double k) {
  for (const auto& q : g.panels())
    if (norm(q.centroid - p) < k * q.diameter()) return false;
  return true;
}

} // namespace

TEST_CASE("far kernel of two distant unit panels") {
  const std::vector<Panel> panels = {square({-0.5, -0.5, 0}, 1, 1, 0), square({99.5, -0.5, 0}, 1, 1, 1)};
  const auto g = TrapGeometry::from_panels("pair", panels, {"a", "b"}, 1, 1);
  const auto a = assemble_influence_matrix(g);
  REQUIRE(a.size() == 2);
  const double expect = 1.0 / (4 * oracle::pi * oracle::eps0 * 100.0);
  CHECK(a(0, 1) == Approx(expect).epsilon(1e-3));
  CHECK(a(1, 0) == Approx(expect).epsilon(1e-3));
}

TEST_CASE("self term is the equal-area disc") {
  gen::Source src(3);
  for (int n = 0; n < 50; ++n) {
    const double w = src.log_uniform(1e-6, 1.0), h = src.log_uniform(1e-6, 1.0);
    const std::vector<Panel> panels = {square({}, w, h)};
    const double disc = std::sqrt(w * h / oracle::pi) / (2 * oracle::eps0);
    CHECK(self_potential(panels[0]) == Approx(disc).epsilon(1e-14));
    const auto g = TrapGeometry::from_panels("one", panels, {"p"}, 1, 1);
    CHECK(assemble_influence_matrix(g)(0, 0) == self_potential(panels[0]));
  }
}

// Influence per unit charge (entry / source area) should be symmetric in i, j.
double pair_asymmetry(const InfluenceMatrix& a, const std::vector<Panel>& panels, std::size_t i, std::size_t j) {
  const double kij = a(i, j) / panels[j].area, kji = a(j, i) / panels[i].area;
  return std::abs(kij / kji - 1.0);
}

bool near_pair(const Panel& p, const Panel& q) {
  return norm(p.centroid - q.centroid) < 2 * std::max(p.diameter(), q.diameter());
}

TEST_CASE("sphere influence matrix: far pairs") {
  const auto g = unit_sphere();
  const auto a = assemble_influence_matrix(*g);
  const auto& panels = g->panels();
  REQUIRE(a.size() == panels.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a(i, i) > 0);
  gen::Source src(5);
  double worst = 0;
  for (int n = 0; n < 20000; ++n) {
    const auto i = static_cast<std::size_t>(src.integer(0, static_cast<int>(a.size()) - 1));
    const auto j = static_cast<std::size_t>(src.integer(0, static_cast<int>(a.size()) - 1));
    if (i == j || near_pair(panels[i], panels[j])) continue;
    worst = std::max(worst, pair_asymmetry(a, panels, i, j));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("sphere influence matrix: near pairs within 1%") {
  const auto g = unit_sphere();
  const auto a = assemble_influence_matrix(*g);
  const auto& panels = g->panels();
  double worst = 0;
  std::size_t over = 0, pairs = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) {
      if (!near_pair(panels[i], panels[j])) continue;
      ++pairs;
      const double r = pair_asymmetry(a, panels, i, j);
      worst = std::max(worst, r);
      if (r >= 0.01) ++over;
    }
  MESSAGE(pairs << " near pairs, " << over << " at or above 1%, worst " << worst);
  CHECK(worst < 0.01);
}

TEST_CASE("coincident panels are rejected") {
  auto panels = mesh_surface(Rectangle{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {2, 2});
  panels.push_back(panels.front());
  const auto g = TrapGeometry::from_panels("dup", panels, {"p"}, 1, 1);
  CHECK_THROWS_AS(assemble_influence_matrix(g), GeometryError);
}

TEST_CASE("unit sphere capacitance and exterior field") {
  const auto f = sphere_field();
  const auto& g = f->geometry();
  CHECK(g.panels().size() >= 2048);
  CHECK(f->basis().max_residual() < 1e-9);
  CHECK(f->basis().min_pivot_ratio > 1e-14);
  const double one[] = {1.0};
  CHECK(total_charge(f->basis(), g, one) == Approx(4 * oracle::pi * oracle::eps0).epsilon(0.01));

  gen::Source src(7);
  for (int n = 0; n < 50; ++n) {
    const Vec3 dir = src.unit_vector();
    CHECK(f->potential(2.0 * dir, one) == Approx(0.5).epsilon(0.01));
    const Vec3 e = f->field(2.0 * dir, one);
    CHECK(norm(e) == Approx(0.25).epsilon(0.01));
    CHECK(dot(e, dir) / norm(e) > 0.999);
  }
  const double zero[] = {0.0};
  CHECK(f->potential({0, 0, 2}, zero) == 0.0);
  CHECK(f->field({0, 0, 2}, zero) == Vec3{});
  CHECK(total_charge(f->basis(), g, zero) == 0.0);
}

TEST_CASE("concentric spheres") {
  auto panels = sphere_panels(1.0, 48, 24, 0);
  const auto outer = sphere_panels(2.0, 48, 24, 1);
  panels.insert(panels.end(), outer.begin(), outer.end());
  const auto g = std::make_shared<const TrapGeometry>(
      TrapGeometry::from_panels("shells", panels, {"inner", "outer"}, 1, 1));
  const auto f = BemField::solve(g);
  const double eps0 = oracle::eps0, pi = oracle::pi;
  double q_inner = 0;
  for (std::size_t i = 0; i < g->panels().size(); ++i)
    if (g->panels()[i].electrode_id == 0) q_inner += f->basis().at(i, 0) * g->panels()[i].area;
  CHECK(q_inner == Approx(8 * pi * eps0).epsilon(0.015));
  const double v[] = {1.0, 0.0};
  CHECK(f->potential({0, 1.5, 0}, v) == Approx(2.0 / 1.5 - 1.0).epsilon(0.015));
}

TEST_CASE("zero voltages give zero charge") {
  const auto f = sphere_field();
  const double zero[] = {0.0};
  for (std::size_t i = 0; i < f->basis().panel_count; ++i) CHECK(f->basis().at(i, 0) * zero[0] == 0.0);
  CHECK(total_charge(f->basis(), f->geometry(), zero) == 0.0);
}

TEST_CASE("ideal quadrupole centre potential and axial field") {
  const double r0 = 1e-3, z0 = r0 / std::sqrt(2.0), v = 1.0;
  const auto f = ideal_field(32);
  const double volts[] = {v, 0.0, 0.0};
  CHECK(f->potential({0, 0, 0}, volts) == Approx(0.5 * v).epsilon(0.01));
  CHECK(f->potential({0, 0, 0}, volts) == Approx(ideal_phi({}, v, r0)).epsilon(0.01));
  const double z = 0.2 * z0;
  const double ez = 4 * z * v / (r0 * r0 + 2 * z0 * z0);
  CHECK(f->field({0, 0, z}, volts).z == Approx(ez).epsilon(0.01));

  // Basis of the three electrodes sums to one inside the trap.
  double sum = 0;
  double b[3];
  f->basis_potentials({1e-4, 2e-4, 1e-4}, b);
  for (double x : b) sum += x;
  CHECK(sum == Approx(1.0).epsilon(1e-3));
}

TEST_CASE("collocation reproduces electrode potentials") {
  const auto f = ideal_field(16);
  const auto& g = f->geometry();
  const auto ne = g.electrode_count();
  CHECK(f->basis().max_residual() < 1e-9);
  // Reconstruct at centroids through the matrix.
  const auto a = assemble_influence_matrix(g);
  for (std::size_t i = 0; i < g.panels().size(); i += 7) {
    for (std::size_t e = 0; e < ne; ++e) {
      double phi = 0;
      for (std::size_t j = 0; j < g.panels().size(); ++j) phi += a(i, j) * f->basis().at(j, e);
      const double want = g.panels()[i].electrode_id == static_cast<int>(e) ? 1.0 : 0.0;
      CHECK(std::abs(phi - want) < 1e-6);
    }
  }
}

TEST_CASE("superposition property") {
  const auto f = ideal_field(16);
  gen::Source src(11);
  for (int n = 0; n < gen::default_cases; ++n) {
    const Vec3 p = src.in_ball(0.4e-3);
    double v1[3], v2[3], v12[3];
    for (int e = 0; e < 3; ++e) {
      v1[e] = src.uniform(-300, 300);
      v2[e] = src.uniform(-300, 300);
      v12[e] = v1[e] + v2[e];
    }
    const double s = f->potential(p, v1) + f->potential(p, v2);
    CHECK(std::abs(f->potential(p, v12) - s) <= 1e-12 * (std::abs(s) + 300));
    const Vec3 es = f->field(p, v1) + f->field(p, v2);
    CHECK(norm(f->field(p, v12) - es) <= 1e-12 * (norm(es) + 3e5));
  }
}

TEST_CASE("Laplace and field-potential consistency") {
  const double r0 = 1e-3;
  // Slow growth keeps far panels small enough for the clearance rule.
  MeshOptions m = default_ideal_mesh(r0, 32);
  m.growth = 0.05;
  const auto f = BemField::solve(std::make_shared<const TrapGeometry>(build_ideal_quadrupole(r0, m)));
  const auto& g = f->geometry();
  MESSAGE(g.panels().size() << " panels");
  const double volts[] = {1.0, 0.0, 0.0};
  const double h = r0 / 50;
  gen::Source src(13);
  int tested = 0;
  for (int n = 0; n < 400 && tested < 60; ++n) {
    const Vec3 p = src.in_ball(0.5 * r0);
    if (!clear_of_panels(g, p, 3.0)) continue;
    ++tested;
    const double phi = f->potential(p, volts);
    double lap = -6 * phi;
    Vec3 grad{};
    for (int k = 0; k < 3; ++k) {
      Vec3 d{};
      d[k] = h;
      const double up = f->potential(p + d, volts), dn = f->potential(p - d, volts);
      lap += up + dn;
      grad[k] = (up - dn) / (2 * h);
    }
    lap /= h * h;
    CHECK(std::abs(lap) < 1e-3 * std::abs(phi) / (r0 * r0));
    const Vec3 e = f->field(p, volts);
    CHECK(norm(e + grad) <= 1e-3 * norm(e));
  }
  CHECK(tested >= 20);
}

TEST_CASE("ideal quadrupole error falls with mesh refinement") {
  const double r0 = 1e-3;
  const double volts[] = {1.0, 0.0, 0.0};
  std::vector<Vec3> pts;
  gen::Source src(17);
  for (int n = 0; n < 40; ++n) pts.push_back(src.in_ball(0.3 * r0));
  double prev = 1e300;
  for (int res : {16, 32, 64}) {
    const auto f = ideal_field(res);
    double err = 0;
    for (const auto& p : pts) err += std::abs(f->potential(p, volts) - ideal_phi(p, 1.0, r0));
    err /= pts.size();
    MESSAGE("resolution " << res << ": " << f->geometry().panels().size() << " panels, mean error " << err << " V");
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("inside-conductor evaluations are counted") {
  MeshOptions m;
  m.panel_size = 0.25;
  const auto g = std::make_shared<const TrapGeometry>(
      TrapGeometry::build("sphere", {{"sphere", {sphere_body({}, 1.0)}}}, m, 1.0, 1.0));
  const auto f = BemField::solve(g);
  const double one[] = {1.0};
  const auto before = f->inside_conductor_count();
  (void)f->potential({0, 0, 0}, one);
  (void)f->field({0.1, 0, 0}, one);
  CHECK(f->inside_conductor_count() == before + 2);
  (void)f->potential({0, 0, 3}, one);
  CHECK(f->inside_conductor_count() == before + 2);
}

TEST_CASE("instantaneous voltages") {
  const double omega = 2 * oracle::pi * 15.955e6;
  DriveWaveform d;
  d.channels = {{0.0, 281.4, omega, 0.0}, {2.12, 0.0, 0.0, 0.0}};
  auto v = instantaneous_voltages(d, 0.0);
  CHECK(v[0] == Approx(281.4));
  CHECK(v[1] == 2.12);
  v = instantaneous_voltages(d, oracle::pi / omega);
  CHECK(v[0] == Approx(-281.4));
  CHECK(v[1] == 2.12);
  CHECK(instantaneous_voltages(d, 1.234e-3)[1] == 2.12);
  CHECK(d.rf_omega() == omega);
  CHECK_FALSE(d.is_static());

  DriveWaveform phased;
  phased.channels = {{1.0, 2.0, omega, oracle::pi / 2}};
  CHECK(instantaneous_voltages(phased, 0.0)[0] == Approx(1.0));
  DriveWaveform still;
  still.channels = {{3.0, 0.0, 0.0, 0.0}};
  CHECK(still.is_static());
}
