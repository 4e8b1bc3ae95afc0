#include "iontrap/field_fdm.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "iontrap/error.hpp"

namespace iontrap {
namespace {

struct Cell {
  int i, j, k;
  double tx, ty, tz;
};

Cell locate(const PotentialGrid& g, const Vec3& p) {
  if (!g.contains(p)) {
    std::ostringstream msg;
    msg << std::setprecision(6) << "point " << p << " lies outside the FDM grid";
    throw SolverError(msg.str());
  }
  const auto& s = g.spec();
  auto axis = [&](double x, double o, int n, int& idx, double& t) {
    const double u = (x - o) / s.spacing;
    idx = std::clamp(static_cast<int>(std::floor(u)), 0, n - 2);
    t = u - idx;
  };
  Cell c{};
  axis(p.x, s.origin.x, s.nx, c.i, c.tx);
  axis(p.y, s.origin.y, s.ny, c.j, c.ty);
  axis(p.z, s.origin.z, s.nz, c.k, c.tz);
  return c;
}

template <class F>
auto trilinear(const Cell& c, F&& at) {
  auto lerp = [](auto a, auto b, double t) { return (1.0 - t) * a + t * b; };
  const auto c00 = lerp(at(c.i, c.j, c.k), at(c.i + 1, c.j, c.k), c.tx);
  const auto c10 = lerp(at(c.i, c.j + 1, c.k), at(c.i + 1, c.j + 1, c.k), c.tx);
  const auto c01 = lerp(at(c.i, c.j, c.k + 1), at(c.i + 1, c.j, c.k + 1), c.tx);
  const auto c11 = lerp(at(c.i, c.j + 1, c.k + 1), at(c.i + 1, c.j + 1, c.k + 1), c.tx);
  return lerp(lerp(c00, c10, c.ty), lerp(c01, c11, c.ty), c.tz);
}

// d Phi / d(axis) at a node: central inside, one-sided on the faces.
double node_derivative(const PotentialGrid& g, int i, int j, int k, int axis) {
  const auto& s = g.spec();
  int idx[3] = {i, j, k};
  const int n[3] = {s.nx, s.ny, s.nz};
  auto val = [&](int shift) {
    int q[3] = {idx[0], idx[1], idx[2]};
    q[axis] += shift;
    return g.value(q[0], q[1], q[2]);
  };
  if (idx[axis] == 0) return (val(1) - val(0)) / s.spacing;
  if (idx[axis] == n[axis] - 1) return (val(0) - val(-1)) / s.spacing;
  return (val(1) - val(-1)) / (2.0 * s.spacing);
}

} // namespace

GridSpec GridSpec::around(const TrapGeometry& geometry, int nodes, double extent_factor) {
  const double half = extent_factor * std::max(geometry.r0(), geometry.z0());
  GridSpec s;
  s.nx = s.ny = s.nz = nodes;
  s.spacing = 2.0 * half / (nodes - 1);
  s.origin = {-half, -half, -half};
  s.validate();
  return s;
}

void GridSpec::validate() const {
  if (!(spacing > 0.0)) throw SolverError("FDM grid spacing must be positive");
  if (nx < 3 || ny < 3 || nz < 3) throw SolverError("FDM grid needs at least 3 nodes per axis");
}

PotentialGrid::PotentialGrid(const GridSpec& spec) : spec_(spec) {
  spec_.validate();
  const std::size_t n = static_cast<std::size_t>(spec.nx) * spec.ny * spec.nz;
  values_.assign(n, 0.0);
  fixed_.assign(n, 0);
}

Vec3 PotentialGrid::node_position(int i, int j, int k) const {
  return spec_.origin + Vec3{i * spec_.spacing, j * spec_.spacing, k * spec_.spacing};
}

void PotentialGrid::fix(int i, int j, int k, double v) {
  values_[index(i, j, k)] = v;
  fixed_[index(i, j, k)] = 1;
}

bool PotentialGrid::contains(const Vec3& p) const {
  const Vec3 hi = node_position(spec_.nx - 1, spec_.ny - 1, spec_.nz - 1);
  return p.x >= spec_.origin.x && p.x <= hi.x && p.y >= spec_.origin.y && p.y <= hi.y && p.z >= spec_.origin.z &&
         p.z <= hi.z;
}

PotentialGrid rasterize(const TrapGeometry& geometry, std::span<const double> volts, const GridSpec& spec) {
  if (volts.size() != geometry.electrode_count()) throw SolverError("voltage count does not match the electrodes");
  PotentialGrid g(spec);
  const int nx = spec.nx, ny = spec.ny, nz = spec.nz;
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      for (int k = 0; k < nz; ++k) {
        if (i == 0 || j == 0 || k == 0 || i == nx - 1 || j == ny - 1 || k == nz - 1) {
          g.fix(i, j, k, 0.0);
        } else if (auto e = geometry.electrode_containing(g.node_position(i, j, k))) {
          g.fix(i, j, k, volts[static_cast<std::size_t>(*e)]);
        }
      }
    }
  }
  return g;
}

SorReport relax(PotentialGrid& g, const SorOptions& opt) {
  if (!(opt.omega > 0.0) || !(opt.omega < 2.0)) throw SolverError("SOR relaxation factor must lie in (0, 2)");
  const auto& s = g.spec();
  const int nx = s.nx, ny = s.ny, nz = s.nz;
  const std::size_t sj = static_cast<std::size_t>(nz), si = static_cast<std::size_t>(ny) * nz;
  auto& v = g.mutable_values();
  const auto& fixed = g.mask();
  SorReport rep;
  const int stride = std::max(1, opt.history_stride);

  for (long sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    double max_update = 0.0;
    for (int color = 0; color < 2; ++color) {
#pragma omp parallel for reduction(max : max_update) schedule(static)
      for (int i = 1; i < nx - 1; ++i) {
        for (int j = 1; j < ny - 1; ++j) {
          const int k0 = 1 + ((i + j + 1 + color) & 1);
          std::size_t idx = i * si + j * sj + k0;
          for (int k = k0; k < nz - 1; k += 2, idx += 2) {
            if (fixed[idx]) continue;
            const double avg = (v[idx - si] + v[idx + si] + v[idx - sj] + v[idx + sj] + v[idx - 1] + v[idx + 1]) / 6.0;
            const double du = opt.omega * (avg - v[idx]);
            v[idx] += du;
            max_update = std::max(max_update, std::abs(du));
          }
        }
      }
    }
    rep.sweeps = sweep;
    rep.final_update = max_update;
    if (sweep % stride == 0) rep.history.push_back(max_update);
    if (max_update < opt.tolerance) return rep;
  }

  std::ostringstream msg;
  msg << std::setprecision(3) << "SOR did not converge in " << opt.max_sweeps << " sweeps (tolerance "
      << opt.tolerance << " V); max update history:";
  const std::size_t n = rep.history.size();
  const std::size_t step = std::max<std::size_t>(1, n / 8);
  for (std::size_t i = 0; i < n; i += step) msg << ' ' << rep.history[i];
  msg << " ... " << rep.final_update;
  throw SolverError(msg.str());
}

PotentialGrid solve_grid(const TrapGeometry& geometry, std::span<const double> volts, const GridSpec& spec,
                         const SorOptions& options, SorReport* report) {
  PotentialGrid g = rasterize(geometry, volts, spec);
  const SorReport r = relax(g, options);
  if (report) *report = r;
  return g;
}

double interpolate_potential(const PotentialGrid& g, const Vec3& p) {
  const Cell c = locate(g, p);
  return trilinear(c, [&](int i, int j, int k) { return g.value(i, j, k); });
}

Vec3 interpolate_field(const PotentialGrid& g, const Vec3& p) {
  const Cell c = locate(g, p);
  return trilinear(c, [&](int i, int j, int k) {
    return Vec3{-node_derivative(g, i, j, k, 0), -node_derivative(g, i, j, k, 1), -node_derivative(g, i, j, k, 2)};
  });
}

FdmField::FdmField(std::shared_ptr<const TrapGeometry> geometry, const GridSpec& spec, const SorOptions& options)
    : geometry_(std::move(geometry)) {
  if (!geometry_) throw SolverError("FDM field needs a geometry");
  const std::size_t ne = geometry_->electrode_count();
  std::vector<double> unit(ne, 0.0);
  for (std::size_t e = 0; e < ne; ++e) {
    unit[e] = 1.0;
    SorReport rep;
    grids_.push_back(solve_grid(*geometry_, unit, spec, options, &rep));
    reports_.push_back(std::move(rep));
    unit[e] = 0.0;
  }
}

double FdmField::potential(const Vec3& p, std::span<const double> volts) const {
  double sum = 0.0;
  for (std::size_t e = 0; e < grids_.size(); ++e)
    if (volts[e] != 0.0) sum += volts[e] * interpolate_potential(grids_[e], p);
  return sum;
}

Vec3 FdmField::field(const Vec3& p, std::span<const double> volts) const {
  Vec3 sum{};
  for (std::size_t e = 0; e < grids_.size(); ++e)
    if (volts[e] != 0.0) sum += volts[e] * interpolate_field(grids_[e], p);
  return sum;
}

} // namespace iontrap
