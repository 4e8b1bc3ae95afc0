#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "iontrap/drive.hpp"
#include "iontrap/dynamics.hpp"
#include "iontrap/field_cache.hpp"
#include "iontrap/field_model.hpp"
#include "iontrap/geometry.hpp"
#include "iontrap/mathieu.hpp"
#include "iontrap/scenario.hpp"
#include "iontrap/spectral.hpp"

namespace iontrap {

struct Timing {
  std::string stage;
  double seconds = 0.0;
};

struct FieldDiagnostics {
  std::size_t panel_count = 0;
  std::size_t electrode_count = 0;
  std::optional<double> bem_max_residual;     // V
  std::optional<double> bem_min_pivot_ratio;
  std::optional<long> fdm_max_sweeps;
  std::size_t inside_conductor_evaluations = 0;
  std::size_t cache_fallbacks = 0;
};

/// Geometry, solved field and optional cache for one scenario.
struct FieldSetup {
  std::shared_ptr<const TrapGeometry> geometry;
  FieldModelPtr source;                       // bem, fdm or analytic
  std::shared_ptr<const CachedField> cache;   // null when disabled
  FieldModelPtr model;                        // cache if present, else source
  std::vector<Timing> timings;

  FieldDiagnostics diagnostics() const;
};

/// Throws SolverError/GeometryError from the underlying solvers.
FieldSetup prepare_field(const Scenario& scenario);

/// Channels in electrode-id order; electrodes without a drive are grounded.
/// The scenario's rf_phase is added to every AC channel.
DriveWaveform make_drive(const Scenario& scenario);

IonSpecies make_species(const Scenario& scenario);

struct Prediction {
  BetaMethod method = BetaMethod::fourth_order;
  std::string label;                  // e.g. "fourth_order", "linear_formulas"
  std::optional<double> radial;       // Hz
  std::optional<double> axial;        // Hz
  std::optional<double> beta_radial;
  std::optional<double> beta_axial;
  std::string note;
};

struct HeatingReport {
  double resistance = 0.0;   // Ohm
  double temperature = 0.0;  // K
  double distance = 0.0;     // m
  double frequency = 0.0;    // Hz, secular frequency used
  double quanta_per_second = 0.0;
  double seconds_per_quantum = 0.0;
};

struct Report {
  Scenario scenario;
  double rf_frequency = 0.0;  // Hz
  std::array<std::optional<SpectralPeak>, 3> peaks;  // x, y, z
  std::array<std::string, 3> peak_errors;
  std::array<std::array<double, 2>, 3> bands{};      // search band per axis, Hz
  std::optional<double> radial_frequency;            // Hz, mean of x and y
  std::optional<double> axial_frequency;             // Hz
  std::optional<StabilityParams> stability;          // analytic (a, q) of the scenario
  std::vector<Prediction> predictions;
  std::optional<double> efficiency_estimate;
  std::optional<double> kappa_estimate;
  std::optional<HeatingReport> heating;
  bool lost = false;
  double lost_time = 0.0;
  std::size_t samples = 0;
  double step = 0.0;    // s
  double dt_out = 0.0;  // s
  FieldDiagnostics field;
  std::vector<Timing> timings;
  std::vector<std::string> files;
  std::vector<std::string> warnings;
};

struct RunOptions {
  std::filesystem::path output_dir = "iontrap_out";
  bool write_files = true;
  std::optional<double> duration;  // overrides the scenario duration
  std::ostream* log = nullptr;
};

/// geometry -> field -> trajectory -> spectra -> report. Output files go to
/// output_dir/<scenario name>/.
Report run_scenario(const Scenario& scenario, const RunOptions& options = {});

/// Same as above with an already prepared field (for sweeps sharing a solve).
Report run_scenario(const Scenario& scenario, const FieldSetup& field, const RunOptions& options = {});

/// Potential on a square grid of `points` x `points` in the plane "zx", "zy"
/// or "xy" at `offset` along the normal axis, at the t = 0 drive snapshot.
/// CSV columns: method,x,y,z,phi. Throws SolverError if |offset| exceeds the
/// geometry's bounding radius.
void export_potential_map(std::ostream& os, const FieldSetup& field, const DriveWaveform& drive,
                          const std::string& plane, int points, double half_width, double offset = 0.0);

/// Default map half-width: 1.5 max(r0, z0).
double default_map_half_width(const TrapGeometry& geometry);

struct MethodError {
  std::string method;    // "bem" or "fdm"
  std::string size;      // resolution description
  std::size_t unknowns = 0;
  double mean_potential_error = 0.0;  // relative to the analytic potential
  double max_potential_error = 0.0;
  double mean_field_error = 0.0;      // relative to the largest analytic |E| in the sample
  double max_field_error = 0.0;
  double seconds = 0.0;
};

struct CompareOptions {
  std::vector<int> bem_resolutions;  // empty: the scenario's mesh resolution
  std::vector<int> fdm_nodes;        // empty: the scenario's fdm_nodes
  int samples = 200;
  unsigned seed = 12345;
};

/// BEM and FDM against the analytic ideal quadrupole (ring 1 V, endcaps 0 V)
/// over random points with |r| < 0.5 r0. Throws ConfigError for other traps.
std::vector<MethodError> compare_methods(const Scenario& scenario, const CompareOptions& options = {});

void write_comparison_csv(std::ostream& os, const std::vector<MethodError>& rows);

} // namespace iontrap
