#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iontrap/geometry.hpp"
#include "iontrap/vec3.hpp"

namespace iontrap {

enum class TrapKind { ideal_quadrupole, npl_endcap, innsbruck_linear, custom };
enum class FieldMethod { bem, fdm, analytic };

std::string_view to_string(TrapKind k);
std::string_view to_string(FieldMethod m);

/// Drive of one electrode. Amplitudes are stored zero-to-peak; RMS input is
/// converted with sqrt(2) at load.
struct DriveSpec {
  std::string electrode;
  double dc = 0.0;         // V
  double amplitude = 0.0;  // V, zero-to-peak
  double frequency = 0.0;  // Hz
  double phase = 0.0;      // rad

  friend bool operator==(const DriveSpec&, const DriveSpec&) = default;
};

/// One closed solid of a custom trap; the section name is the electrode label.
struct CustomElectrode {
  enum class Shape { sphere, rod, torus, washer };
  std::string label;
  Shape shape = Shape::sphere;
  Vec3 origin;             // sphere centre, or start of the body along its axis
  Vec3 axis{0.0, 0.0, 1.0};
  double radius = 0.0;        // sphere/rod radius, torus centre-line radius, washer outer radius
  double inner_radius = 0.0;  // washer
  double minor_radius = 0.0;  // torus
  double length = 0.0;        // rod length, washer thickness

  friend bool operator==(const CustomElectrode&, const CustomElectrode&) = default;
};

struct IonSpec {
  std::string isotope = "Sr-88";
  std::optional<double> mass_u;  // overrides the isotope table
  int charge_state = 1;
  double kinetic_energy = 0.05;  // eV
  Vec3 position;

  friend bool operator==(const IonSpec&, const IonSpec&) = default;
};

struct SimulationSpec {
  double duration = 1e-3;  // s
  int steps_per_rf_period = 100;
  double dt_out = 0.0;     // s; 0 means 10 samples per RF period
  FieldMethod method = FieldMethod::bem;
  bool cache = true;
  double cache_fraction = 0.3;  // box half-widths as fractions of (r0, r0, z0)
  int cache_nodes = 17;
  int fdm_nodes = 129;
  double rf_phase = 0.0;   // rad, added to every AC channel

  friend bool operator==(const SimulationSpec&, const SimulationSpec&) = default;
};

/// Overrides of the builder's default mesh.
struct MeshSpec {
  std::optional<double> panel_size;
  std::optional<double> growth;
  std::optional<double> max_panel_size;
  std::optional<int> min_azimuthal;
  std::optional<int> max_azimuthal;
  int resolution = 32;  // ideal quadrupole only

  friend bool operator==(const MeshSpec&, const MeshSpec&) = default;
};

struct AnalysisSpec {
  std::optional<double> efficiency;          // endcap epsilon for the analytic predictions
  std::optional<double> kappa;               // linear-trap kappa for the analytic predictions
  std::optional<double> heating_resistance;  // Ohm
  double temperature = 300.0;                // K
  std::optional<double> heating_distance;    // m; default r0 (linear) or z0

  friend bool operator==(const AnalysisSpec&, const AnalysisSpec&) = default;
};

struct OutputSpec {
  bool trajectory = true;
  bool spectra = true;
  bool geometry = false;
  bool report = true;
  std::string potential_map;  // plane ("zx", "zy", "xy") or empty
  int map_points = 101;

  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct Scenario {
  std::string name;
  std::string description;
  TrapKind trap = TrapKind::ideal_quadrupole;
  double r0 = 1e-3;  // ideal quadrupole, and the characteristic r0 of custom traps
  double z0 = 0.0;   // custom traps only
  EndcapTrapParams endcap;
  LinearTrapParams linear;
  std::vector<CustomElectrode> custom;
  std::vector<DriveSpec> drives;
  IonSpec ion;
  SimulationSpec simulation;
  MeshSpec mesh;
  AnalysisSpec analysis;
  OutputSpec outputs;

  /// Throws ConfigError with the offending line.
  static Scenario parse(std::string_view text);
  static Scenario load(const std::filesystem::path& path);

  /// Config text that parses back to an identical scenario.
  std::string serialize() const;

  /// Cross-field checks: one RF frequency, known electrodes, sane numbers.
  void validate() const;

  /// Shared RF frequency in Hz (0 if no channel has an AC amplitude).
  double rf_frequency() const;
  const DriveSpec* drive_for(std::string_view electrode) const;

  /// Electrode labels of the trap kind, in electrode-id order.
  std::vector<std::string> electrode_labels() const;

  TrapGeometry build_geometry() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

} // namespace iontrap
