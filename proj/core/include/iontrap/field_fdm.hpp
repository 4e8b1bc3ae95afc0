#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "iontrap/field_model.hpp"
#include "iontrap/geometry.hpp"

namespace iontrap {

struct GridSpec {
  Vec3 origin;  // position of node (0, 0, 0), m
  double spacing = 0.0;
  int nx = 0, ny = 0, nz = 0;

  /// Cube centred on the trap, half-width extent_factor * max(r0, z0), with
  /// `nodes` per axis.
  static GridSpec around(const TrapGeometry& geometry, int nodes, double extent_factor = 3.0);
  void validate() const;
};

/// Node values plus a Dirichlet mask. Index order is x-major: (i * ny + j) * nz + k.
class PotentialGrid {
 public:
  explicit PotentialGrid(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * spec_.ny + j) * spec_.nz + k;
  }
  Vec3 node_position(int i, int j, int k) const;
  double value(int i, int j, int k) const { return values_[index(i, j, k)]; }
  bool is_fixed(int i, int j, int k) const { return fixed_[index(i, j, k)] != 0; }
  void fix(int i, int j, int k, double v);
  void set(int i, int j, int k, double v) { values_[index(i, j, k)] = v; }

  const std::vector<double>& values() const { return values_; }
  const std::vector<std::uint8_t>& mask() const { return fixed_; }
  std::vector<double>& mutable_values() { return values_; }

  bool contains(const Vec3& p) const;

 private:
  GridSpec spec_;
  std::vector<double> values_;
  std::vector<std::uint8_t> fixed_;
};

struct SorOptions {
  double omega = 1.9;
  double tolerance = 1e-7;  // V, max update per sweep
  long max_sweeps = 200000;
  int history_stride = 1;   // record every n-th sweep's max update
};

struct SorReport {
  long sweeps = 0;
  double final_update = 0.0;
  std::vector<double> history;
};

/// Box faces grounded; nodes inside an electrode solid pinned to its voltage.
PotentialGrid rasterize(const TrapGeometry& geometry, std::span<const double> volts, const GridSpec& spec);

/// Red-black SOR on the free nodes. Throws SolverError with the update
/// history when the sweep budget runs out.
SorReport relax(PotentialGrid& grid, const SorOptions& options = {});

/// rasterize + relax.
PotentialGrid solve_grid(const TrapGeometry& geometry, std::span<const double> volts, const GridSpec& spec,
                         const SorOptions& options = {}, SorReport* report = nullptr);

/// Trilinear interpolation of node values. Throws SolverError outside the grid.
double interpolate_potential(const PotentialGrid& grid, const Vec3& p);

/// -grad Phi from central differences at the nodes (one-sided on the box
/// faces), interpolated trilinearly. Throws SolverError outside the grid.
Vec3 interpolate_field(const PotentialGrid& grid, const Vec3& p);

/// One grid per electrode at 1 V, combined linearly.
class FdmField final : public FieldModel {
 public:
  FdmField(std::shared_ptr<const TrapGeometry> geometry, const GridSpec& spec, const SorOptions& options = {});

  std::size_t electrode_count() const override { return grids_.size(); }
  std::string name() const override { return "fdm"; }
  double potential(const Vec3& p, std::span<const double> volts) const override;
  Vec3 field(const Vec3& p, std::span<const double> volts) const override;

  const PotentialGrid& basis_grid(std::size_t electrode) const { return grids_[electrode]; }
  const std::vector<SorReport>& reports() const { return reports_; }

 private:
  std::shared_ptr<const TrapGeometry> geometry_;
  std::vector<PotentialGrid> grids_;
  std::vector<SorReport> reports_;
};

} // namespace iontrap
