#include "iontrap/dynamics.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "iontrap/constants.hpp"
#include "iontrap/error.hpp"

namespace iontrap {

IonState initial_state_from_energy(double ke_ev, const IonSpecies& species, const Vec3& position) {
  if (!(ke_ev >= 0.0)) throw Error("kinetic energy must be non-negative");
  if (!(species.mass > 0.0)) throw Error("ion mass must be positive");
  const double speed = std::sqrt(2.0 * ke_ev * constants::electron_volt / species.mass);
  const double c = speed / std::sqrt(3.0);
  return {position, {c, c, c}, 0.0, species};
}

std::vector<double> Trajectory::axis(int axis) const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.position[axis]);
  return out;
}

Trajectory integrate_trajectory(const IonState& init, const FieldModel& field, const DriveWaveform& drive,
                                double duration, const IntegrationOptions& opt) {
  if (!(duration > 0.0)) throw Error("trajectory duration must be positive");
  if (drive.size() != field.electrode_count()) {
    throw Error("drive has " + std::to_string(drive.size()) + " channels but the field model has " +
                std::to_string(field.electrode_count()) + " electrodes");
  }
  double dt = 0.0;
  if (opt.time_step) {
    dt = *opt.time_step;
  } else {
    if (opt.steps_per_rf_period < 50) throw Error("steps_per_rf_period must be at least 50");
    const double omega = drive.rf_omega();
    if (!(omega > 0.0)) throw Error("static drive needs an explicit integration time step");
    dt = 2.0 * constants::pi / omega / opt.steps_per_rf_period;
  }
  if (!(dt > 0.0)) throw Error("integration time step must be positive");

  const auto stride = static_cast<long>(std::max(1.0, std::round(opt.dt_out / dt)));
  const auto steps = static_cast<long>(std::llround(duration / dt));
  const double qm = init.species.charge / init.species.mass;

  Trajectory tr;
  tr.species = init.species;
  tr.step = dt;
  tr.dt_out = stride * dt;
  tr.field_method = field.name();
  tr.drive = drive;
  tr.samples.reserve(static_cast<std::size_t>(steps / stride + 1));

  std::vector<double> volts(drive.size());
  auto accel = [&](const Vec3& r, double t) {
    instantaneous_voltages(drive, t, volts);
    return qm * field.field(r, volts);
  };

  Vec3 r = init.position, v = init.velocity;
  const double t0 = init.time;
  tr.samples.push_back({t0, r, v});
  for (long n = 0; n < steps; ++n) {
    const double t = t0 + n * dt;
    const Vec3 a1 = accel(r, t);
    const Vec3 r2 = r + 0.5 * dt * v, v2 = v + 0.5 * dt * a1;
    const Vec3 a2 = accel(r2, t + 0.5 * dt);
    const Vec3 r3 = r + 0.5 * dt * v2, v3 = v + 0.5 * dt * a2;
    const Vec3 a3 = accel(r3, t + 0.5 * dt);
    const Vec3 r4 = r + dt * v3, v4 = v + dt * a3;
    const Vec3 a4 = accel(r4, t + dt);
    const Vec3 rn = r + dt / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4);
    const Vec3 vn = v + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    const double tn = t0 + (n + 1) * dt;

    if (!is_finite(rn) || !is_finite(vn)) {
      std::ostringstream msg;
      msg << std::setprecision(9) << "non-finite ion state after t = " << t << " s; last good position " << r
          << " m, velocity " << v << " m/s";
      throw SolverError(msg.str());
    }
    r = rn;
    v = vn;
    if (norm(r) > opt.bounding_radius) {
      tr.lost = true;
      tr.lost_time = tn;
      tr.lost_position = r;
      break;
    }
    if ((n + 1) % stride == 0) tr.samples.push_back({tn, r, v});
  }
  return tr;
}

double total_energy(const IonState& s, const FieldModel& field, std::span<const double> volts) {
  return 0.5 * s.species.mass * norm2(s.velocity) + s.species.charge * field.potential(s.position, volts);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  os << "t,x,y,z,vx,vy,vz\n" << std::setprecision(12);
  for (const auto& s : tr.samples) {
    os << s.t << ',' << s.position.x << ',' << s.position.y << ',' << s.position.z << ',' << s.velocity.x << ','
       << s.velocity.y << ',' << s.velocity.z << '\n';
  }
}

} // namespace iontrap
