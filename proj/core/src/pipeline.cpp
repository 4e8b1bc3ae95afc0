#include "iontrap/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "iontrap/constants.hpp"
#include "iontrap/error.hpp"
#include "iontrap/field_bem.hpp"
#include "iontrap/field_fdm.hpp"
#include "iontrap/heating.hpp"
#include "iontrap/report.hpp"

namespace iontrap {
namespace {

using constants::pi;
using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void log(const RunOptions& o, const std::string& msg) {
  if (o.log) *o.log << "[" << msg << "]\n" << std::flush;
}

double amplitude_of(const Scenario& sc, std::string_view electrode) {
  const auto* d = sc.drive_for(electrode);
  return d ? d->amplitude : 0.0;
}

double dc_of(const Scenario& sc, std::string_view electrode) {
  const auto* d = sc.drive_for(electrode);
  return d ? d->dc : 0.0;
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

struct Analytic {
  std::optional<StabilityParams> params;
  std::vector<Prediction> predictions;
  std::vector<std::string> warnings;
};

Prediction predict(const StabilityParams& p, double omega, BetaMethod method) {
  Prediction out;
  out.method = method;
  out.label = std::string(to_string(method));
  auto one = [&](int u) -> std::optional<double> {
    const double a = p.a[u], q = p.q[u];
    switch (method) {
      case BetaMethod::dehmelt: return beta_dehmelt(a, q);
      case BetaMethod::fourth_order: return beta_fourth_order(a, q);
      case BetaMethod::floquet: return (a == 0.0 && q == 0.0) ? 0.0 : beta_floquet(a, q);
      case BetaMethod::simulated: return std::nullopt;
    }
    return std::nullopt;
  };
  try {
    out.beta_radial = one(0);
    out.radial = *out.beta_radial * omega / (4.0 * pi);
  } catch (const SolverError& e) {
    out.note += std::string("radial: ") + e.what() + ". ";
  }
  try {
    out.beta_axial = one(2);
    out.axial = *out.beta_axial * omega / (4.0 * pi);
  } catch (const SolverError& e) {
    out.note += std::string("axial: ") + e.what() + ". ";
  }
  if (method == BetaMethod::dehmelt) {
    if (!dehmelt_applicable(p.q[0], Axis::x) || !dehmelt_applicable(p.q[2], Axis::z)) {
      out.note += "outside the Dehmelt validity range (|q_xy| < 0.2, |q_z| < 0.4).";
    }
  }
  return out;
}

Analytic analytic_predictions(const Scenario& sc, const IonSpecies& ion, std::optional<double> kappa_fallback) {
  Analytic an;
  const double omega = 2.0 * pi * sc.rf_frequency();
  switch (sc.trap) {
    case TrapKind::npl_endcap: {
      const double eps = sc.analysis.efficiency.value_or(sc.endcap.efficiency);
      const double V = 0.5 * (amplitude_of(sc, "inner_endcap_pos") + amplitude_of(sc, "inner_endcap_neg"));
      const double U = 0.5 * (dc_of(sc, "inner_endcap_pos") + dc_of(sc, "inner_endcap_neg"));
      an.params = endcap_stability_params(ion, U, V, omega, sc.endcap.z0(), eps);
      break;
    }
    case TrapKind::ideal_quadrupole: {
      // the ring-to-endcap difference drives the trap; efficiency 1
      const double V = 0.5 * (amplitude_of(sc, "endcap_pos") + amplitude_of(sc, "endcap_neg")) -
                       amplitude_of(sc, "ring");
      const double U = 0.5 * (dc_of(sc, "endcap_pos") + dc_of(sc, "endcap_neg")) - dc_of(sc, "ring");
      an.params = endcap_stability_params(ion, U, V, omega, sc.r0 / std::sqrt(2.0), 1.0);
      break;
    }
    case TrapKind::innsbruck_linear: {
      const double V = amplitude_of(sc, "rf_rods") - amplitude_of(sc, "ground_rods");
      const double U0 = 0.5 * (dc_of(sc, "ring_pos") + dc_of(sc, "ring_neg"));
      std::optional<double> kappa = sc.analysis.kappa;
      if (!kappa) kappa = sc.linear.geometric_factor;
      if (!kappa) kappa = kappa_fallback;
      const double r0 = sc.linear.r0(), z0 = sc.linear.z0();
      an.params = linear_stability_params(ion, U0, V, omega, r0, z0, kappa.value_or(0.0));
      Prediction eq;
      eq.label = "linear_formulas";
      eq.method = BetaMethod::dehmelt;
      eq.radial = linear_radial_frequency(ion, V, omega, r0) / (2.0 * pi);
      if (kappa) {
        try {
          eq.axial = linear_axial_frequency(ion, *kappa, U0, z0) / (2.0 * pi);
        } catch (const SolverError& e) {
          eq.note = e.what();
        }
      }
      eq.note += "ideal both-pairs drive reference";
      if (!kappa) eq.note += "; no geometric factor available";
      an.predictions.push_back(eq);
      if (!kappa) an.warnings.push_back("no geometric factor: axial predictions assume kappa = 0");
      break;
    }
    case TrapKind::custom: return an;
  }
  for (auto m : {BetaMethod::dehmelt, BetaMethod::fourth_order, BetaMethod::floquet})
    an.predictions.push_back(predict(*an.params, omega, m));
  return an;
}

std::filesystem::path scenario_dir(const Scenario& sc, const RunOptions& o) { return o.output_dir / sc.name; }

template <class F>
std::string write_file(const std::filesystem::path& path, F&& writer) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write '" + path.string() + "'");
  writer(os);
  if (!os) throw Error("failed writing '" + path.string() + "'");
  return path.string();
}

} // namespace

FieldDiagnostics FieldSetup::diagnostics() const {
  FieldDiagnostics d;
  d.panel_count = geometry ? geometry->panels().size() : 0;
  d.electrode_count = geometry ? geometry->electrode_count() : 0;
  if (const auto* bem = dynamic_cast<const BemField*>(source.get())) {
    d.bem_max_residual = bem->basis().max_residual();
    d.bem_min_pivot_ratio = bem->basis().min_pivot_ratio;
    d.inside_conductor_evaluations = bem->inside_conductor_count();
  }
  if (const auto* fdm = dynamic_cast<const FdmField*>(source.get())) {
    long sweeps = 0;
    for (const auto& r : fdm->reports()) sweeps = std::max(sweeps, r.sweeps);
    d.fdm_max_sweeps = sweeps;
  }
  if (cache) d.cache_fallbacks = cache->fallback_count();
  return d;
}

IonSpecies make_species(const Scenario& sc) {
  if (sc.ion.mass_u) return IonSpecies::from_mass_u(sc.ion.isotope, *sc.ion.mass_u, sc.ion.charge_state);
  return IonSpecies::from_isotope(sc.ion.isotope, sc.ion.charge_state);
}

DriveWaveform make_drive(const Scenario& sc) {
  const auto labels = sc.electrode_labels();
  DriveWaveform w;
  for (const auto& label : labels) {
    DriveChannel c;
    if (const auto* d = sc.drive_for(label)) {
      c.dc = d->dc;
      c.amplitude = d->amplitude;
      c.omega = 2.0 * pi * d->frequency;
      c.phase = d->phase + (d->amplitude != 0.0 ? sc.simulation.rf_phase : 0.0);
    }
    w.channels.push_back(c);
  }
  return w;
}

FieldSetup prepare_field(const Scenario& sc) {
  FieldSetup fs;
  auto t0 = Clock::now();
  fs.geometry = std::make_shared<const TrapGeometry>(sc.build_geometry());
  fs.timings.push_back({"geometry", since(t0)});

  t0 = Clock::now();
  switch (sc.simulation.method) {
    case FieldMethod::bem: fs.source = BemField::solve(fs.geometry); break;
    case FieldMethod::fdm:
      fs.source = std::make_shared<FdmField>(fs.geometry, GridSpec::around(*fs.geometry, sc.simulation.fdm_nodes));
      break;
    case FieldMethod::analytic:
      if (sc.trap == TrapKind::ideal_quadrupole) {
        fs.source = std::make_shared<AnalyticQuadrupoleField>(sc.r0, sc.r0 / std::sqrt(2.0));
      } else if (sc.trap == TrapKind::innsbruck_linear) {
        const double kappa = sc.analysis.kappa ? *sc.analysis.kappa : sc.linear.geometric_factor.value_or(0.0);
        fs.source = std::make_shared<AnalyticLinearField>(sc.linear.r0(), sc.linear.z0(), kappa);
      } else {
        throw ConfigError("the analytic field method needs an ideal_quadrupole or innsbruck_linear trap");
      }
      break;
  }
  fs.timings.push_back({"field_solve", since(t0)});

  fs.model = fs.source;
  if (sc.simulation.cache && sc.simulation.method != FieldMethod::analytic) {
    t0 = Clock::now();
    const double f = sc.simulation.cache_fraction;
    const Vec3 half{f * fs.geometry->r0(), f * fs.geometry->r0(), f * fs.geometry->z0()};
    fs.cache = std::make_shared<const CachedField>(fs.source, -1.0 * half, half, sc.simulation.cache_nodes);
    fs.model = fs.cache;
    fs.timings.push_back({"field_cache", since(t0)});
  }
  return fs;
}

double default_map_half_width(const TrapGeometry& g) { return 1.5 * std::max(g.r0(), g.z0()); }

void export_potential_map(std::ostream& os, const FieldSetup& fs, const DriveWaveform& drive, const std::string& plane,
                          int points, double half_width, double offset) {
  if (points < 2) throw SolverError("potential map needs at least 2 points per side");
  if (!(half_width > 0.0)) throw SolverError("potential map half-width must be positive");
  if (plane != "zx" && plane != "zy" && plane != "xy") throw SolverError("unknown map plane '" + plane + "'");
  if (std::abs(offset) > fs.geometry->bounding_radius()) {
    throw SolverError("map plane offset " + fmt(offset) + " m lies outside the geometry (bounding radius " +
                      fmt(fs.geometry->bounding_radius()) + " m)");
  }
  const auto volts = instantaneous_voltages(drive, 0.0);
  os << "method,x,y,z,phi\n" << std::setprecision(10);
  const std::string method = fs.source->name();
  for (int i = 0; i < points; ++i) {
    const double u = -half_width + 2.0 * half_width * i / (points - 1);
    for (int j = 0; j < points; ++j) {
      const double v = -half_width + 2.0 * half_width * j / (points - 1);
      Vec3 p;
      if (plane == "zx") p = {v, offset, u};
      if (plane == "zy") p = {offset, v, u};
      if (plane == "xy") p = {u, v, offset};
      os << method << ',' << p.x << ',' << p.y << ',' << p.z << ',' << fs.source->potential(p, volts) << '\n';
    }
  }
}

Report run_scenario(const Scenario& sc, const RunOptions& o) {
  log(o, sc.name + ": preparing " + std::string(to_string(sc.simulation.method)) + " field");
  const FieldSetup fs = prepare_field(sc);
  return run_scenario(sc, fs, o);
}

Report run_scenario(const Scenario& sc, const FieldSetup& fs, const RunOptions& o) {
  const auto t_start = Clock::now();
  double setup_seconds = 0.0;
  for (const auto& t : fs.timings) setup_seconds += t.seconds;
  sc.validate();
  Report rep;
  rep.scenario = sc;
  rep.timings = fs.timings;
  rep.rf_frequency = sc.rf_frequency();
  const double omega = 2.0 * pi * rep.rf_frequency;
  const IonSpecies ion = make_species(sc);
  const DriveWaveform drive = make_drive(sc);

  // trajectory
  auto t0 = Clock::now();
  const double duration = o.duration.value_or(sc.simulation.duration);
  rep.scenario.simulation.duration = duration;
  IntegrationOptions io;
  io.steps_per_rf_period = sc.simulation.steps_per_rf_period;
  io.dt_out = sc.simulation.dt_out > 0.0 ? sc.simulation.dt_out : 0.1 / rep.rf_frequency;
  io.bounding_radius = fs.geometry->bounding_radius();
  const IonState init = initial_state_from_energy(sc.ion.kinetic_energy, ion, sc.ion.position);
  log(o, sc.name + ": integrating " + fmt(duration * 1e3) + " ms");
  Trajectory tr = integrate_trajectory(init, *fs.model, drive, duration, io);
  tr.scenario = sc.name;
  rep.timings.push_back({"trajectory", since(t0)});
  rep.samples = tr.samples.size();
  rep.step = tr.step;
  rep.dt_out = tr.dt_out;
  rep.lost = tr.lost;
  rep.lost_time = tr.lost_time;
  if (tr.lost) rep.warnings.push_back("ion lost at t = " + fmt(tr.lost_time) + " s");

  // a priori predictions steer the spectral search bands
  Analytic an = analytic_predictions(sc, ion, std::nullopt);
  rep.stability = an.params;
  for (auto& w : an.warnings) rep.warnings.push_back(w);

  // spectra
  t0 = Clock::now();
  std::array<Spectrum, 3> spectra;
  const double f_hi = rep.rf_frequency / 2.0;
  const double f_lo = 10.0 / duration;
  for (auto& b : rep.bands) b = {f_lo, f_hi};
  if (sc.trap == TrapKind::npl_endcap || sc.trap == TrapKind::ideal_quadrupole) {
    for (const auto& p : an.predictions) {
      if (p.method == BetaMethod::fourth_order && p.radial && p.axial && *p.radial > 0.0 && *p.axial > *p.radial) {
        const double split = std::sqrt(*p.radial * *p.axial);
        rep.bands[0][1] = rep.bands[1][1] = std::min(split, f_hi);
        rep.bands[2][0] = split;
      }
    }
  }
  const bool have_spectra = tr.samples.size() >= min_spectrum_samples;
  if (!have_spectra) {
    rep.warnings.push_back("too few samples (" + std::to_string(tr.samples.size()) + ") for spectral analysis");
  }
  for (int u = 0; u < 3 && have_spectra; ++u) {
    spectra[u] = power_spectrum(tr.axis(u), tr.dt_out);
    try {
      rep.peaks[u] = extract_secular_frequency(spectra[u], rep.bands[u][0], rep.bands[u][1]);
    } catch (const SolverError& e) {
      rep.peak_errors[u] = e.what();
      rep.warnings.push_back(std::string("axis ") + "xyz"[u] + ": " + e.what());
    }
  }
  if (rep.peaks[0] && rep.peaks[1]) rep.radial_frequency = 0.5 * (rep.peaks[0]->frequency + rep.peaks[1]->frequency);
  if (rep.peaks[2]) rep.axial_frequency = rep.peaks[2]->frequency;
  rep.timings.push_back({"spectra", since(t0)});

  // inverse estimates
  if (rep.axial_frequency) {
    try {
      if (sc.trap == TrapKind::npl_endcap) {
        const double V = 0.5 * (amplitude_of(sc, "inner_endcap_pos") + amplitude_of(sc, "inner_endcap_neg"));
        rep.efficiency_estimate =
            estimate_efficiency(2.0 * pi * *rep.axial_frequency, ion, V, omega, sc.endcap.z0());
      } else if (sc.trap == TrapKind::ideal_quadrupole) {
        const double V = std::abs(0.5 * (amplitude_of(sc, "endcap_pos") + amplitude_of(sc, "endcap_neg")) -
                                  amplitude_of(sc, "ring"));
        rep.efficiency_estimate =
            estimate_efficiency(2.0 * pi * *rep.axial_frequency, ion, V, omega, sc.r0 / std::sqrt(2.0));
      } else if (sc.trap == TrapKind::innsbruck_linear) {
        const double U0 = 0.5 * (dc_of(sc, "ring_pos") + dc_of(sc, "ring_neg"));
        rep.kappa_estimate = estimate_geometric_factor(2.0 * pi * *rep.axial_frequency, ion, U0, sc.linear.z0());
      }
    } catch (const Error& e) {
      rep.warnings.push_back(std::string("inverse estimate: ") + e.what());
    }
  }
  if (sc.trap == TrapKind::innsbruck_linear && !sc.analysis.kappa && !sc.linear.geometric_factor &&
      rep.kappa_estimate) {
    an = analytic_predictions(sc, ion, rep.kappa_estimate);
    rep.stability = an.params;
    for (auto& p : an.predictions) p.note += p.note.empty() ? "kappa from simulation" : "; kappa from simulation";
  }
  rep.predictions = an.predictions;

  // heating
  if (sc.analysis.heating_resistance) {
    HeatingInputs hi;
    hi.resistance = *sc.analysis.heating_resistance;
    hi.temperature = sc.analysis.temperature;
    hi.distance = sc.analysis.heating_distance.value_or(
        sc.trap == TrapKind::innsbruck_linear ? sc.linear.r0() : fs.geometry->z0());
    hi.species = ion;
    std::optional<double> f = rep.radial_frequency;
    if (!f) {
      for (const auto& p : rep.predictions)
        if (p.method == BetaMethod::fourth_order && p.radial) f = p.radial;
    }
    if (f && *f > 0.0) {
      hi.omega = 2.0 * pi * *f;
      const auto h = johnson_heating_rate(hi);
      rep.heating = HeatingReport{hi.resistance, hi.temperature, hi.distance, *f, h.quanta_per_second,
                                  h.seconds_per_quantum};
    } else {
      rep.warnings.push_back("heating rate skipped: no radial secular frequency");
    }
  }

  rep.field = fs.diagnostics();
  if (rep.field.inside_conductor_evaluations > 0) {
    rep.warnings.push_back(std::to_string(rep.field.inside_conductor_evaluations) +
                           " field evaluations fell inside a conductor");
  }

  // outputs
  if (o.write_files) {
    t0 = Clock::now();
    const auto dir = scenario_dir(sc, o);
    std::filesystem::create_directories(dir);
    if (sc.outputs.trajectory) {
      rep.files.push_back(write_file(dir / "trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, tr); }));
    }
    if (sc.outputs.spectra && have_spectra) {
      for (int u = 0; u < 3; ++u) {
        const std::string name = std::string("spectrum_") + "xyz"[u] + ".csv";
        rep.files.push_back(write_file(dir / name, [&](std::ostream& os) { write_spectrum_csv(os, spectra[u]); }));
      }
    }
    if (sc.outputs.geometry) {
      rep.files.push_back(
          write_file(dir / "geometry.csv", [&](std::ostream& os) { write_panels_csv(os, *fs.geometry); }));
    }
    if (!sc.outputs.potential_map.empty()) {
      const std::string name = "potential_map_" + sc.outputs.potential_map + ".csv";
      rep.files.push_back(write_file(dir / name, [&](std::ostream& os) {
        export_potential_map(os, fs, drive, sc.outputs.potential_map, sc.outputs.map_points,
                             default_map_half_width(*fs.geometry));
      }));
    }
    rep.timings.push_back({"outputs", since(t0)});
    rep.timings.push_back({"total", setup_seconds + since(t_start)});
    if (sc.outputs.report) {
      rep.files.push_back((dir / "report.txt").string());
      rep.files.push_back((dir / "report.json").string());
      write_file(dir / "report.txt", [&](std::ostream& os) { write_report_text(os, rep); });
      write_file(dir / "report.json", [&](std::ostream& os) { write_report_json(os, rep); });
    }
  } else {
    rep.timings.push_back({"total", setup_seconds + since(t_start)});
  }
  return rep;
}

std::vector<MethodError> compare_methods(const Scenario& sc, const CompareOptions& opt) {
  if (sc.trap != TrapKind::ideal_quadrupole) throw ConfigError("compare needs an ideal_quadrupole scenario");
  const double r0 = sc.r0, z0 = r0 / std::sqrt(2.0);
  const AnalyticQuadrupoleField truth(r0, z0);
  const std::vector<double> volts{1.0, 0.0, 0.0};

  std::mt19937 rng(opt.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<Vec3> pts;
  while (static_cast<int>(pts.size()) < opt.samples) {
    const Vec3 p{uni(rng), uni(rng), uni(rng)};
    if (norm2(p) < 1.0) pts.push_back(0.5 * r0 * p);
  }
  double e_scale = 0.0;
  for (const auto& p : pts) e_scale = std::max(e_scale, norm(truth.field(p, volts)));

  auto measure = [&](const FieldModel& model, MethodError& row) {
    double sp = 0.0, sf = 0.0;
    for (const auto& p : pts) {
      const double phi = truth.potential(p, volts);
      const double ep = std::abs(model.potential(p, volts) - phi) / std::abs(phi);
      const double ef = norm(model.field(p, volts) - truth.field(p, volts)) / e_scale;
      sp += ep;
      sf += ef;
      row.max_potential_error = std::max(row.max_potential_error, ep);
      row.max_field_error = std::max(row.max_field_error, ef);
    }
    row.mean_potential_error = sp / pts.size();
    row.mean_field_error = sf / pts.size();
  };

  std::vector<MethodError> rows;
  const auto bem_res = opt.bem_resolutions.empty() ? std::vector<int>{sc.mesh.resolution} : opt.bem_resolutions;
  const auto fdm_n = opt.fdm_nodes.empty() ? std::vector<int>{sc.simulation.fdm_nodes} : opt.fdm_nodes;
  for (int res : bem_res) {
    MethodError row;
    row.method = "bem";
    row.size = "resolution " + std::to_string(res);
    const auto t0 = Clock::now();
    auto g = std::make_shared<const TrapGeometry>(build_ideal_quadrupole(r0, res));
    const auto bem = BemField::solve(g);
    row.seconds = since(t0);
    row.unknowns = g->panels().size();
    measure(*bem, row);
    rows.push_back(row);
  }
  for (int n : fdm_n) {
    MethodError row;
    row.method = "fdm";
    row.size = std::to_string(n) + "^3 nodes";
    const auto t0 = Clock::now();
    auto g = std::make_shared<const TrapGeometry>(build_ideal_quadrupole(r0, sc.mesh.resolution));
    const auto spec = GridSpec::around(*g, n);
    const PotentialGrid grid = solve_grid(*g, volts, spec);
    row.seconds = since(t0);
    row.unknowns = static_cast<std::size_t>(n) * n * n;
    double sp = 0.0, sf = 0.0;
    for (const auto& p : pts) {
      const double phi = truth.potential(p, volts);
      const double ep = std::abs(interpolate_potential(grid, p) - phi) / std::abs(phi);
      const double ef = norm(interpolate_field(grid, p) - truth.field(p, volts)) / e_scale;
      sp += ep;
      sf += ef;
      row.max_potential_error = std::max(row.max_potential_error, ep);
      row.max_field_error = std::max(row.max_field_error, ef);
    }
    row.mean_potential_error = sp / pts.size();
    row.mean_field_error = sf / pts.size();
    rows.push_back(row);
  }
  return rows;
}

void write_comparison_csv(std::ostream& os, const std::vector<MethodError>& rows) {
  os << "method,size,unknowns,mean_potential_error,max_potential_error,mean_field_error,max_field_error,seconds\n"
     << std::setprecision(6);
  for (const auto& r : rows) {
    os << r.method << ',' << r.size << ',' << r.unknowns << ',' << r.mean_potential_error << ','
       << r.max_potential_error << ',' << r.mean_field_error << ',' << r.max_field_error << ',' << r.seconds << '\n';
  }
}

} // namespace iontrap
