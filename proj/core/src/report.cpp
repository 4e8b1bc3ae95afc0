#include "iontrap/report.hpp"

#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace iontrap {
namespace {

using nlohmann::json;

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string mhz(const std::optional<double>& f) {
  if (!f) return "n/a";
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << *f * 1e-6 << " MHz";
  return s.str();
}

std::string num(double v, int precision = 6) {
  std::ostringstream s;
  s << std::setprecision(precision) << (v == 0.0 ? 0.0 : v);
  return s.str();
}

json to_json(const Report& r) {
  const auto& sc = r.scenario;
  json j;
  j["schema_version"] = report_schema_version;
  j["scenario"] = {{"name", sc.name},
                   {"description", sc.description},
                   {"trap", std::string(to_string(sc.trap))},
                   {"field_method", std::string(to_string(sc.simulation.method))},
                   {"ion", sc.ion.isotope},
                   {"charge_state", sc.ion.charge_state},
                   {"duration_s", sc.simulation.duration}};
  j["rf_frequency_hz"] = r.rf_frequency;

  json axes = json::object();
  for (int u = 0; u < 3; ++u) {
    json a;
    a["band_hz"] = {r.bands[u][0], r.bands[u][1]};
    if (r.peaks[u]) {
      a["frequency_hz"] = r.peaks[u]->frequency;
      a["power"] = r.peaks[u]->power;
      a["interpolated"] = r.peaks[u]->interpolated;
    } else {
      a["frequency_hz"] = nullptr;
      a["error"] = r.peak_errors[u];
    }
    axes[std::string(1, "xyz"[u])] = a;
  }
  j["secular"] = {{"radial_hz", opt(r.radial_frequency)}, {"axial_hz", opt(r.axial_frequency)}, {"axes", axes}};

  if (r.stability) {
    j["stability"] = {{"a", r.stability->a}, {"q", r.stability->q}};
  } else {
    j["stability"] = nullptr;
  }

  json preds = json::array();
  for (const auto& p : r.predictions) {
    preds.push_back({{"label", p.label},
                     {"radial_hz", opt(p.radial)},
                     {"axial_hz", opt(p.axial)},
                     {"beta_radial", opt(p.beta_radial)},
                     {"beta_axial", opt(p.beta_axial)},
                     {"note", p.note}});
  }
  j["predictions"] = preds;
  j["efficiency_estimate"] = opt(r.efficiency_estimate);
  j["kappa_estimate"] = opt(r.kappa_estimate);

  if (r.heating) {
    const auto& h = *r.heating;
    j["heating"] = {{"resistance_ohm", h.resistance},
                    {"temperature_k", h.temperature},
                    {"distance_m", h.distance},
                    {"secular_frequency_hz", h.frequency},
                    {"quanta_per_second", h.quanta_per_second},
                    {"seconds_per_quantum", h.seconds_per_quantum}};
  } else {
    j["heating"] = nullptr;
  }

  j["trajectory"] = {{"samples", r.samples},
                     {"step_s", r.step},
                     {"dt_out_s", r.dt_out},
                     {"lost", r.lost},
                     {"lost_time_s", r.lost ? json(r.lost_time) : json(nullptr)}};

  const auto& f = r.field;
  j["field"] = {{"panels", f.panel_count},
                {"electrodes", f.electrode_count},
                {"bem_max_residual_v", opt(f.bem_max_residual)},
                {"bem_min_pivot_ratio", opt(f.bem_min_pivot_ratio)},
                {"fdm_max_sweeps", f.fdm_max_sweeps ? json(*f.fdm_max_sweeps) : json(nullptr)},
                {"inside_conductor_evaluations", f.inside_conductor_evaluations},
                {"cache_fallbacks", f.cache_fallbacks}};

  json timings = json::object();
  for (const auto& t : r.timings) timings[t.stage] = t.seconds;
  j["timings_s"] = timings;
  j["files"] = r.files;
  j["warnings"] = r.warnings;
  return j;
}

} // namespace

std::string report_json(const Report& report) { return to_json(report).dump(2); }

void write_report_json(std::ostream& os, const Report& report) { os << report_json(report) << '\n'; }

void write_report_text(std::ostream& os, const Report& r) {
  const auto& sc = r.scenario;
  os << "scenario   " << sc.name << '\n';
  if (!sc.description.empty()) os << "           " << sc.description << '\n';
  os << "trap       " << to_string(sc.trap) << " (" << to_string(sc.simulation.method) << ")\n";
  os << "ion        " << sc.ion.isotope << ' ' << sc.ion.charge_state << "+\n";
  os << "rf         " << mhz(r.rf_frequency) << '\n';
  os << "samples    " << r.samples << " (step " << num(r.step) << " s, output " << num(r.dt_out) << " s)\n";
  if (r.lost) os << "ION LOST   t = " << num(r.lost_time) << " s\n";
  os << '\n';

  os << "secular frequencies\n";
  for (int u = 0; u < 3; ++u) {
    os << "  " << "xyz"[u] << "  ";
    if (r.peaks[u]) {
      os << mhz(r.peaks[u]->frequency);
    } else {
      os << "n/a (" << r.peak_errors[u] << ')';
    }
    os << "   band " << mhz(r.bands[u][0]) << " .. " << mhz(r.bands[u][1]) << '\n';
  }
  os << "  radial " << mhz(r.radial_frequency) << "   axial " << mhz(r.axial_frequency) << "\n\n";

  if (r.stability) {
    os << "stability parameters\n";
    for (int u = 0; u < 3; ++u) {
      os << "  " << "xyz"[u] << "  a = " << num(r.stability->a[u]) << "  q = " << num(r.stability->q[u]) << '\n';
    }
    os << '\n';
  }

  if (!r.predictions.empty()) {
    os << "predictions\n";
    for (const auto& p : r.predictions) {
      os << "  " << std::left << std::setw(14) << p.label << std::right << " radial " << mhz(p.radial)
         << "   axial " << mhz(p.axial);
      if (!p.note.empty()) os << "   (" << p.note << ')';
      os << '\n';
    }
    os << '\n';
  }

  if (r.efficiency_estimate) os << "efficiency estimate  " << num(*r.efficiency_estimate, 5) << '\n';
  if (r.kappa_estimate) os << "kappa estimate       " << num(*r.kappa_estimate, 5) << '\n';
  if (r.heating) {
    const auto& h = *r.heating;
    os << "heating              " << num(h.quanta_per_second, 4) << " quanta/s (" << num(h.seconds_per_quantum, 4)
       << " s/quantum) at R = " << num(h.resistance) << " ohm, T = " << num(h.temperature) << " K, d = "
       << num(h.distance) << " m\n";
  }
  os << '\n';

  const auto& f = r.field;
  os << "field      " << f.panel_count << " panels, " << f.electrode_count << " electrodes\n";
  if (f.bem_max_residual) os << "           BEM residual " << num(*f.bem_max_residual, 3) << " V\n";
  if (f.bem_min_pivot_ratio) os << "           min pivot ratio " << num(*f.bem_min_pivot_ratio, 3) << '\n';
  if (f.fdm_max_sweeps) os << "           SOR sweeps " << *f.fdm_max_sweeps << '\n';
  if (f.cache_fallbacks) os << "           cache fallbacks " << f.cache_fallbacks << '\n';

  os << "\ntimings\n";
  for (const auto& t : r.timings) os << "  " << std::left << std::setw(12) << t.stage << std::right << num(t.seconds, 4) << " s\n";

  if (!r.warnings.empty()) {
    os << "\nwarnings\n";
    for (const auto& w : r.warnings) os << "  " << w << '\n';
  }
}

} // namespace iontrap
