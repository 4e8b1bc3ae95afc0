#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "iontrap/drive.hpp"
#include "iontrap/field_model.hpp"
#include "iontrap/mathieu.hpp"
#include "iontrap/vec3.hpp"

namespace iontrap {

struct IonState {
  Vec3 position;  // m
  Vec3 velocity;  // m/s
  double time = 0.0;
  IonSpecies species;
};

/// Ion at `position` with kinetic energy `ke_ev` shared equally by the three
/// positive velocity components.
IonState initial_state_from_energy(double ke_ev, const IonSpecies& species, const Vec3& position = {});

struct TrajectorySample {
  double t = 0.0;
  Vec3 position;
  Vec3 velocity;
};

struct Trajectory {
  IonSpecies species;
  double dt_out = 0.0;  // s, actual output interval (a multiple of the step)
  double step = 0.0;    // s, integrator step
  std::vector<TrajectorySample> samples;
  bool lost = false;
  double lost_time = 0.0;
  Vec3 lost_position;
  std::string scenario;
  std::string field_method;
  DriveWaveform drive;

  /// Coordinate `axis` (0 = x, 1 = y, 2 = z) of every sample.
  std::vector<double> axis(int axis) const;
};

struct IntegrationOptions {
  int steps_per_rf_period = 100;
  double dt_out = 0.0;  // 0: every step
  /// Ion counts as lost once |position| exceeds this radius.
  double bounding_radius = std::numeric_limits<double>::infinity();
  /// Step for static drives, which have no RF period. Overrides
  /// steps_per_rf_period when set.
  std::optional<double> time_step;
};

/// Classic fixed-step RK4 of m r'' = e E(r, t). The field is queried at the
/// substage positions and times. Output is decimated to the nearest whole
/// number of steps per dt_out. Throws SolverError on a non-finite state,
/// naming the last good state.
Trajectory integrate_trajectory(const IonState& init, const FieldModel& field, const DriveWaveform& drive,
                                double duration, const IntegrationOptions& options);

/// m |v|^2 / 2 + e Phi(position), J.
double total_energy(const IonState& state, const FieldModel& field, std::span<const double> volts);

/// t,x,y,z,vx,vy,vz
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);

} // namespace iontrap
