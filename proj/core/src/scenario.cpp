#include "iontrap/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "iontrap/config.hpp"
#include "iontrap/constants.hpp"
#include "iontrap/error.hpp"
#include "iontrap/mathieu.hpp"

namespace iontrap {
namespace {

using D = Dimension;
using Section = Config::Section;

TrapKind parse_trap(const Config::Entry& e) {
  if (e.value == "ideal_quadrupole") return TrapKind::ideal_quadrupole;
  if (e.value == "npl_endcap") return TrapKind::npl_endcap;
  if (e.value == "innsbruck_linear") return TrapKind::innsbruck_linear;
  if (e.value == "custom") return TrapKind::custom;
  throw ConfigError("unknown trap kind '" + e.value + "' (ideal_quadrupole, npl_endcap, innsbruck_linear, custom)",
                    e.line);
}

FieldMethod parse_method(const Config::Entry& e) {
  if (e.value == "bem") return FieldMethod::bem;
  if (e.value == "fdm") return FieldMethod::fdm;
  if (e.value == "analytic") return FieldMethod::analytic;
  throw ConfigError("unknown field method '" + e.value + "' (bem, fdm, analytic)", e.line);
}

CustomElectrode::Shape parse_shape(const Config::Entry& e) {
  using S = CustomElectrode::Shape;
  if (e.value == "sphere") return S::sphere;
  if (e.value == "rod") return S::rod;
  if (e.value == "torus") return S::torus;
  if (e.value == "washer") return S::washer;
  throw ConfigError("unknown shape '" + e.value + "' (sphere, rod, torus, washer)", e.line);
}

std::string_view to_string(CustomElectrode::Shape s) {
  switch (s) {
    case CustomElectrode::Shape::sphere: return "sphere";
    case CustomElectrode::Shape::rod: return "rod";
    case CustomElectrode::Shape::torus: return "torus";
    case CustomElectrode::Shape::washer: return "washer";
  }
  return "?";
}

// Angle in degrees, exact when written in degrees.
double degrees(const Config::Entry& e) {
  const double rad = parse_quantity(e.value, D::angle, e.line);
  const auto sp = e.value.find_last_of(" \t");
  if (sp != std::string::npos && e.value.substr(sp + 1) == "deg") {
    return parse_quantity(e.value.substr(0, sp), D::none, e.line);
  }
  return rad * 180.0 / constants::pi;
}

int as_int(const Section& s, std::string_view key, long fallback) {
  const long v = s.integer(key, fallback);
  if (v < -1000000000L || v > 1000000000L) throw ConfigError("'" + std::string(key) + "' out of range", s.find(key)->line);
  return static_cast<int>(v);
}

void parse_geometry(const Section& g, Scenario& sc) {
  switch (sc.trap) {
    case TrapKind::ideal_quadrupole:
      g.require_known({"r0"});
      sc.r0 = g.quantity("r0", D::length, sc.r0);
      break;
    case TrapKind::npl_endcap: {
      g.require_known({"inner_diameter", "inner_length", "outer_inner_diameter", "outer_outer_diameter",
                       "inner_separation", "outer_separation", "outer_cone_angle", "outer_thickness", "efficiency"});
      auto& p = sc.endcap;
      p.inner_diameter = g.quantity("inner_diameter", D::length, p.inner_diameter);
      p.inner_length = g.quantity("inner_length", D::length, p.inner_length);
      p.outer_inner_diameter = g.quantity("outer_inner_diameter", D::length, p.outer_inner_diameter);
      p.outer_outer_diameter = g.quantity("outer_outer_diameter", D::length, p.outer_outer_diameter);
      p.inner_separation = g.quantity("inner_separation", D::length, p.inner_separation);
      p.outer_separation = g.quantity("outer_separation", D::length, p.outer_separation);
      if (const auto* e = g.find("outer_cone_angle")) p.outer_cone_angle_deg = degrees(*e);
      p.outer_thickness = g.optional_quantity("outer_thickness", D::length);
      p.efficiency = g.quantity("efficiency", D::none, p.efficiency);
      break;
    }
    case TrapKind::innsbruck_linear: {
      g.require_known({"rod_diameter", "diagonal_separation", "rod_length", "ring_diameter", "ring_wire_diameter",
                       "ring_separation", "geometric_factor"});
      auto& p = sc.linear;
      p.rod_diameter = g.quantity("rod_diameter", D::length, p.rod_diameter);
      p.diagonal_separation = g.quantity("diagonal_separation", D::length, p.diagonal_separation);
      p.rod_length = g.quantity("rod_length", D::length, p.rod_length);
      p.ring_diameter = g.quantity("ring_diameter", D::length, p.ring_diameter);
      p.ring_wire_diameter = g.quantity("ring_wire_diameter", D::length, p.ring_wire_diameter);
      p.ring_separation = g.quantity("ring_separation", D::length, p.ring_separation);
      p.geometric_factor = g.optional_quantity("geometric_factor", D::none);
      break;
    }
    case TrapKind::custom:
      g.require_known({"r0", "z0"});
      sc.r0 = g.quantity("r0", D::length);
      sc.z0 = g.quantity("z0", D::length);
      break;
  }
}

void validate_label(const std::string& s, int line, const char* what) {
  const bool ok = !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
  if (!ok) throw ConfigError(std::string(what) + " '" + s + "' must use letters, digits, '_' or '-'", line);
}

} // namespace

std::string_view to_string(TrapKind k) {
  switch (k) {
    case TrapKind::ideal_quadrupole: return "ideal_quadrupole";
    case TrapKind::npl_endcap: return "npl_endcap";
    case TrapKind::innsbruck_linear: return "innsbruck_linear";
    case TrapKind::custom: return "custom";
  }
  return "?";
}

std::string_view to_string(FieldMethod m) {
  switch (m) {
    case FieldMethod::bem: return "bem";
    case FieldMethod::fdm: return "fdm";
    case FieldMethod::analytic: return "analytic";
  }
  return "?";
}

Scenario Scenario::parse(std::string_view text) {
  const Config cfg = Config::parse(text);
  Scenario sc;

  for (const auto& s : cfg.sections()) {
    const auto& n = s.name();
    const bool known = n == "scenario" || n == "geometry" || n == "ion" || n == "simulation" || n == "mesh" ||
                       n == "analysis" || n == "outputs" || n.rfind("drive.", 0) == 0 ||
                       n.rfind("electrode.", 0) == 0;
    if (!known) throw ConfigError("unknown section [" + n + "]", s.line());
  }

  const auto* head = cfg.section("scenario");
  if (!head) throw ConfigError("missing [scenario] section");
  head->require_known({"name", "description", "trap"});
  sc.name = head->text("name");
  validate_label(sc.name, head->find("name")->line, "scenario name");
  sc.description = head->text("description", std::string());
  if (const auto* e = head->find("trap")) {
    sc.trap = parse_trap(*e);
  } else {
    throw ConfigError("[scenario] needs a 'trap' key", head->line());
  }

  if (const auto* g = cfg.section("geometry")) {
    parse_geometry(*g, sc);
  } else if (sc.trap == TrapKind::custom) {
    throw ConfigError("custom traps need a [geometry] section with r0 and z0");
  }

  for (const auto* s : cfg.sections_with_prefix("electrode")) {
    if (sc.trap != TrapKind::custom) throw ConfigError("[electrode.*] sections are only valid for custom traps", s->line());
    s->require_known({"shape", "origin", "axis", "radius", "inner_radius", "minor_radius", "length"});
    CustomElectrode el;
    el.label = s->name().substr(std::string("electrode.").size());
    validate_label(el.label, s->line(), "electrode label");
    if (const auto* e = s->find("shape")) {
      el.shape = parse_shape(*e);
    } else {
      throw ConfigError("[" + s->name() + "] needs a 'shape' key", s->line());
    }
    el.origin = s->vector("origin", D::length, Vec3{});
    el.axis = s->vector("axis", D::none, Vec3{0.0, 0.0, 1.0});
    el.radius = s->quantity("radius", D::length);
    el.inner_radius = s->quantity("inner_radius", D::length, 0.0);
    el.minor_radius = s->quantity("minor_radius", D::length, 0.0);
    el.length = s->quantity("length", D::length, 0.0);
    sc.custom.push_back(el);
  }

  for (const auto* s : cfg.sections_with_prefix("drive")) {
    s->require_known({"dc", "amplitude", "amplitude_kind", "frequency", "phase"});
    DriveSpec d;
    d.electrode = s->name().substr(std::string("drive.").size());
    d.dc = s->quantity("dc", D::voltage, 0.0);
    d.amplitude = s->quantity("amplitude", D::voltage, 0.0);
    const std::string kind = s->text("amplitude_kind", std::string("zero_to_peak"));
    if (kind == "rms") {
      d.amplitude *= std::sqrt(2.0);
    } else if (kind != "zero_to_peak") {
      throw ConfigError("amplitude_kind must be 'rms' or 'zero_to_peak'", s->find("amplitude_kind")->line);
    }
    d.frequency = s->quantity("frequency", D::frequency, 0.0);
    d.phase = s->quantity("phase", D::angle, 0.0);
    sc.drives.push_back(d);
  }

  if (const auto* s = cfg.section("ion")) {
    s->require_known({"isotope", "mass", "charge_state", "kinetic_energy", "position"});
    sc.ion.isotope = s->text("isotope", sc.ion.isotope);
    sc.ion.mass_u = s->optional_quantity("mass", D::none);
    if (const auto* e = s->find("isotope"); e && !sc.ion.mass_u && !isotope_mass_u(sc.ion.isotope)) {
      throw ConfigError("unknown isotope '" + sc.ion.isotope + "'", e->line);
    }
    sc.ion.charge_state = as_int(*s, "charge_state", sc.ion.charge_state);
    sc.ion.kinetic_energy = s->quantity("kinetic_energy", D::energy, sc.ion.kinetic_energy);
    sc.ion.position = s->vector("position", D::length, sc.ion.position);
  }

  if (const auto* s = cfg.section("simulation")) {
    s->require_known({"duration", "steps_per_rf_period", "dt_out", "field_method", "cache", "cache_fraction",
                      "cache_nodes", "fdm_nodes", "rf_phase"});
    auto& m = sc.simulation;
    m.duration = s->quantity("duration", D::time, m.duration);
    m.steps_per_rf_period = as_int(*s, "steps_per_rf_period", m.steps_per_rf_period);
    m.dt_out = s->quantity("dt_out", D::time, m.dt_out);
    if (const auto* e = s->find("field_method")) m.method = parse_method(*e);
    m.cache = s->flag("cache", m.cache);
    m.cache_fraction = s->quantity("cache_fraction", D::none, m.cache_fraction);
    m.cache_nodes = as_int(*s, "cache_nodes", m.cache_nodes);
    m.fdm_nodes = as_int(*s, "fdm_nodes", m.fdm_nodes);
    m.rf_phase = s->quantity("rf_phase", D::angle, m.rf_phase);
  }

  if (const auto* s = cfg.section("mesh")) {
    s->require_known({"panel_size", "growth", "max_panel_size", "min_azimuthal", "max_azimuthal", "resolution"});
    auto& m = sc.mesh;
    m.panel_size = s->optional_quantity("panel_size", D::length);
    m.growth = s->optional_quantity("growth", D::none);
    m.max_panel_size = s->optional_quantity("max_panel_size", D::length);
    if (s->has("min_azimuthal")) m.min_azimuthal = as_int(*s, "min_azimuthal", 0);
    if (s->has("max_azimuthal")) m.max_azimuthal = as_int(*s, "max_azimuthal", 0);
    m.resolution = as_int(*s, "resolution", m.resolution);
  }

  if (const auto* s = cfg.section("analysis")) {
    s->require_known({"efficiency", "kappa", "heating_resistance", "temperature", "heating_distance"});
    auto& a = sc.analysis;
    a.efficiency = s->optional_quantity("efficiency", D::none);
    a.kappa = s->optional_quantity("kappa", D::none);
    a.heating_resistance = s->optional_quantity("heating_resistance", D::resistance);
    a.temperature = s->quantity("temperature", D::temperature, a.temperature);
    a.heating_distance = s->optional_quantity("heating_distance", D::length);
  }

  if (const auto* s = cfg.section("outputs")) {
    s->require_known({"trajectory", "spectra", "geometry", "report", "potential_map", "map_points"});
    auto& o = sc.outputs;
    o.trajectory = s->flag("trajectory", o.trajectory);
    o.spectra = s->flag("spectra", o.spectra);
    o.geometry = s->flag("geometry", o.geometry);
    o.report = s->flag("report", o.report);
    o.potential_map = s->text("potential_map", o.potential_map);
    if (o.potential_map == "none") o.potential_map.clear();
    o.map_points = as_int(*s, "map_points", o.map_points);
  }

  sc.validate();
  return sc;
}

Scenario Scenario::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string Scenario::serialize() const {
  std::ostringstream o;
  auto q = [](double v, D d) { return format_quantity(v, d); };
  auto yn = [](bool b) { return b ? "yes" : "no"; };
  auto vec = [](const Vec3& v, D d) {
    return format_quantity(v.x, D::none) + " " + format_quantity(v.y, D::none) + " " + format_quantity(v.z, d);
  };

  o << "[scenario]\nname = " << name << "\n";
  if (!description.empty()) o << "description = " << description << "\n";
  o << "trap = " << to_string(trap) << "\n\n[geometry]\n";
  switch (trap) {
    case TrapKind::ideal_quadrupole: o << "r0 = " << q(r0, D::length) << "\n"; break;
    case TrapKind::npl_endcap: {
      const auto& p = endcap;
      o << "inner_diameter = " << q(p.inner_diameter, D::length) << "\n"
        << "inner_length = " << q(p.inner_length, D::length) << "\n"
        << "outer_inner_diameter = " << q(p.outer_inner_diameter, D::length) << "\n"
        << "outer_outer_diameter = " << q(p.outer_outer_diameter, D::length) << "\n"
        << "inner_separation = " << q(p.inner_separation, D::length) << "\n"
        << "outer_separation = " << q(p.outer_separation, D::length) << "\n"
        << "outer_cone_angle = " << q(p.outer_cone_angle_deg, D::none) << " deg\n";
      if (p.outer_thickness) o << "outer_thickness = " << q(*p.outer_thickness, D::length) << "\n";
      o << "efficiency = " << q(p.efficiency, D::none) << "\n";
      break;
    }
    case TrapKind::innsbruck_linear: {
      const auto& p = linear;
      o << "rod_diameter = " << q(p.rod_diameter, D::length) << "\n"
        << "diagonal_separation = " << q(p.diagonal_separation, D::length) << "\n"
        << "rod_length = " << q(p.rod_length, D::length) << "\n"
        << "ring_diameter = " << q(p.ring_diameter, D::length) << "\n"
        << "ring_wire_diameter = " << q(p.ring_wire_diameter, D::length) << "\n"
        << "ring_separation = " << q(p.ring_separation, D::length) << "\n";
      if (p.geometric_factor) o << "geometric_factor = " << q(*p.geometric_factor, D::none) << "\n";
      break;
    }
    case TrapKind::custom: o << "r0 = " << q(r0, D::length) << "\nz0 = " << q(z0, D::length) << "\n"; break;
  }

  for (const auto& e : custom) {
    o << "\n[electrode." << e.label << "]\nshape = " << to_string(e.shape) << "\n"
      << "origin = " << vec(e.origin, D::length) << "\naxis = " << vec(e.axis, D::none) << "\n"
      << "radius = " << q(e.radius, D::length) << "\ninner_radius = " << q(e.inner_radius, D::length) << "\n"
      << "minor_radius = " << q(e.minor_radius, D::length) << "\nlength = " << q(e.length, D::length) << "\n";
  }

  for (const auto& d : drives) {
    o << "\n[drive." << d.electrode << "]\ndc = " << q(d.dc, D::voltage) << "\namplitude = " << q(d.amplitude, D::voltage)
      << "\namplitude_kind = zero_to_peak\nfrequency = " << q(d.frequency, D::frequency)
      << "\nphase = " << q(d.phase, D::angle) << "\n";
  }

  o << "\n[ion]\nisotope = " << ion.isotope << "\n";
  if (ion.mass_u) o << "mass = " << q(*ion.mass_u, D::none) << "\n";
  o << "charge_state = " << ion.charge_state << "\nkinetic_energy = " << q(ion.kinetic_energy, D::energy)
    << "\nposition = " << vec(ion.position, D::length) << "\n";

  const auto& s = simulation;
  o << "\n[simulation]\nduration = " << q(s.duration, D::time) << "\nsteps_per_rf_period = " << s.steps_per_rf_period
    << "\ndt_out = " << q(s.dt_out, D::time) << "\nfield_method = " << to_string(s.method)
    << "\ncache = " << yn(s.cache) << "\ncache_fraction = " << q(s.cache_fraction, D::none)
    << "\ncache_nodes = " << s.cache_nodes << "\nfdm_nodes = " << s.fdm_nodes
    << "\nrf_phase = " << q(s.rf_phase, D::angle) << "\n";

  o << "\n[mesh]\n";
  if (mesh.panel_size) o << "panel_size = " << q(*mesh.panel_size, D::length) << "\n";
  if (mesh.growth) o << "growth = " << q(*mesh.growth, D::none) << "\n";
  if (mesh.max_panel_size) o << "max_panel_size = " << q(*mesh.max_panel_size, D::length) << "\n";
  if (mesh.min_azimuthal) o << "min_azimuthal = " << *mesh.min_azimuthal << "\n";
  if (mesh.max_azimuthal) o << "max_azimuthal = " << *mesh.max_azimuthal << "\n";
  o << "resolution = " << mesh.resolution << "\n";

  o << "\n[analysis]\n";
  if (analysis.efficiency) o << "efficiency = " << q(*analysis.efficiency, D::none) << "\n";
  if (analysis.kappa) o << "kappa = " << q(*analysis.kappa, D::none) << "\n";
  if (analysis.heating_resistance) o << "heating_resistance = " << q(*analysis.heating_resistance, D::resistance) << "\n";
  o << "temperature = " << q(analysis.temperature, D::temperature) << "\n";
  if (analysis.heating_distance) o << "heating_distance = " << q(*analysis.heating_distance, D::length) << "\n";

  o << "\n[outputs]\ntrajectory = " << yn(outputs.trajectory) << "\nspectra = " << yn(outputs.spectra)
    << "\ngeometry = " << yn(outputs.geometry) << "\nreport = " << yn(outputs.report)
    << "\npotential_map = " << (outputs.potential_map.empty() ? "none" : outputs.potential_map)
    << "\nmap_points = " << outputs.map_points << "\n";
  return o.str();
}

std::vector<std::string> Scenario::electrode_labels() const {
  switch (trap) {
    case TrapKind::ideal_quadrupole: return {"ring", "endcap_pos", "endcap_neg"};
    case TrapKind::npl_endcap: return {"inner_endcap_pos", "inner_endcap_neg", "outer_endcap_pos", "outer_endcap_neg"};
    case TrapKind::innsbruck_linear: return {"rf_rods", "ground_rods", "ring_pos", "ring_neg"};
    case TrapKind::custom: {
      std::vector<std::string> out;
      for (const auto& e : custom) out.push_back(e.label);
      return out;
    }
  }
  return {};
}

const DriveSpec* Scenario::drive_for(std::string_view electrode) const {
  for (const auto& d : drives)
    if (d.electrode == electrode) return &d;
  return nullptr;
}

double Scenario::rf_frequency() const {
  double f = 0.0;
  for (const auto& d : drives)
    if (d.amplitude != 0.0) f = std::max(f, d.frequency);
  return f;
}

void Scenario::validate() const {
  if (description.find('\n') != std::string::npos || description.find('#') != std::string::npos) {
    throw ConfigError("description must be a single line without '#'");
  }
  switch (trap) {
    case TrapKind::ideal_quadrupole:
      if (!(r0 > 0.0)) throw ConfigError("r0 must be positive");
      if (mesh.resolution < 4) throw ConfigError("mesh resolution must be at least 4");
      break;
    case TrapKind::npl_endcap:
      try {
        endcap.validate();
      } catch (const GeometryError& e) {
        throw ConfigError(e.what());
      }
      break;
    case TrapKind::innsbruck_linear:
      try {
        linear.validate();
      } catch (const GeometryError& e) {
        throw ConfigError(e.what());
      }
      break;
    case TrapKind::custom:
      if (!(r0 > 0.0) || !(z0 > 0.0)) throw ConfigError("custom traps need r0 > 0 and z0 > 0");
      if (custom.empty()) throw ConfigError("custom traps need at least one [electrode.*] section");
      break;
  }

  const auto labels = electrode_labels();
  double rf = 0.0;
  for (const auto& d : drives) {
    if (std::find(labels.begin(), labels.end(), d.electrode) == labels.end()) {
      std::string known;
      for (const auto& l : labels) known += (known.empty() ? "" : ", ") + l;
      throw ConfigError("drive for unknown electrode '" + d.electrode + "' (have: " + known + ")");
    }
    if (!std::isfinite(d.dc) || !std::isfinite(d.amplitude) || !std::isfinite(d.phase)) {
      throw ConfigError("drive values for '" + d.electrode + "' must be finite");
    }
    if (d.amplitude < 0.0) throw ConfigError("amplitude of '" + d.electrode + "' must be non-negative");
    if (d.frequency < 0.0) throw ConfigError("frequency of '" + d.electrode + "' must be non-negative");
    if (d.amplitude == 0.0) continue;
    if (!(d.frequency > 0.0)) throw ConfigError("electrode '" + d.electrode + "' has an AC amplitude but no frequency");
    if (rf == 0.0) {
      rf = d.frequency;
    } else if (std::abs(d.frequency - rf) > 1e-12 * rf) {
      throw ConfigError("all AC channels must share one RF frequency");
    }
  }
  if (rf == 0.0) throw ConfigError("scenario needs at least one RF channel (amplitude and frequency)");

  if (!ion.mass_u && !isotope_mass_u(ion.isotope)) throw ConfigError("unknown isotope '" + ion.isotope + "'");
  if (ion.mass_u && !(*ion.mass_u > 0.0)) throw ConfigError("ion mass must be positive");
  if (ion.charge_state == 0) throw ConfigError("ion charge state must be non-zero");
  if (!(ion.kinetic_energy >= 0.0)) throw ConfigError("kinetic energy must be non-negative");

  const auto& s = simulation;
  if (!(s.duration > 0.0)) throw ConfigError("duration must be positive");
  if (s.steps_per_rf_period < 50) throw ConfigError("steps_per_rf_period must be at least 50");
  if (s.dt_out < 0.0) throw ConfigError("dt_out must be non-negative");
  if (!(s.cache_fraction > 0.0) || !(s.cache_fraction < 1.0)) throw ConfigError("cache_fraction must lie in (0, 1)");
  if (s.cache_nodes < 4) throw ConfigError("cache_nodes must be at least 4");
  if (s.fdm_nodes < 9) throw ConfigError("fdm_nodes must be at least 9");
  if (s.method == FieldMethod::analytic) {
    if (trap == TrapKind::npl_endcap || trap == TrapKind::custom) {
      throw ConfigError("the analytic field method needs an ideal_quadrupole or innsbruck_linear trap");
    }
    if (trap == TrapKind::innsbruck_linear && !analysis.kappa && !linear.geometric_factor) {
      throw ConfigError("the analytic linear trap needs a geometric factor (geometry.geometric_factor or analysis.kappa)");
    }
  }
  if (analysis.efficiency && (!(*analysis.efficiency > 0.0) || *analysis.efficiency > 1.0)) {
    throw ConfigError("analysis efficiency must lie in (0, 1]");
  }
  if (analysis.kappa && !(*analysis.kappa > 0.0)) throw ConfigError("analysis kappa must be positive");
  if (analysis.heating_resistance && *analysis.heating_resistance < 0.0) {
    throw ConfigError("heating resistance must be non-negative");
  }
  if (analysis.heating_distance && !(*analysis.heating_distance > 0.0)) {
    throw ConfigError("heating distance must be positive");
  }
  if (!outputs.potential_map.empty() && outputs.potential_map != "zx" && outputs.potential_map != "zy" &&
      outputs.potential_map != "xy") {
    throw ConfigError("potential_map must be zx, zy, xy or none");
  }
  if (outputs.map_points < 2) throw ConfigError("map_points must be at least 2");
}

TrapGeometry Scenario::build_geometry() const {
  auto apply = [&](MeshOptions m) {
    if (mesh.panel_size) m.panel_size = *mesh.panel_size;
    if (mesh.growth) m.growth = *mesh.growth;
    if (mesh.max_panel_size) m.max_panel_size = *mesh.max_panel_size;
    if (mesh.min_azimuthal) m.min_azimuthal = *mesh.min_azimuthal;
    if (mesh.max_azimuthal) m.max_azimuthal = *mesh.max_azimuthal;
    return m;
  };
  switch (trap) {
    case TrapKind::ideal_quadrupole: return build_ideal_quadrupole(r0, apply(default_ideal_mesh(r0, mesh.resolution)));
    case TrapKind::npl_endcap: return build_npl_endcap(endcap, apply(default_endcap_mesh(endcap)));
    case TrapKind::innsbruck_linear: return build_innsbruck_linear(linear, apply(default_linear_mesh(linear)));
    case TrapKind::custom: {
      MeshOptions m;
      m.panel_size = 0.1 * std::min(r0, z0);
      m.growth = 0.2;
      m = apply(m);
      std::vector<TrapGeometry::ElectrodeSpec> specs;
      for (const auto& e : custom) {
        Frame f;
        f.origin = e.origin;
        f.axis = e.axis;
        f.reference = std::abs(normalized(e.axis).x) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
        RevolutionBody body;
        switch (e.shape) {
          case CustomElectrode::Shape::sphere: body = sphere_body(e.origin, e.radius); break;
          case CustomElectrode::Shape::rod: body = rod_body(f, e.radius, e.length); break;
          case CustomElectrode::Shape::torus: body = torus_body(f, e.radius, e.minor_radius); break;
          case CustomElectrode::Shape::washer: body = washer_body(f, e.inner_radius, e.radius, e.length); break;
        }
        specs.push_back({e.label, {body}});
      }
      return TrapGeometry::build("custom", std::move(specs), m, r0, z0);
    }
  }
  throw GeometryError("unknown trap kind");
}

} // namespace iontrap
