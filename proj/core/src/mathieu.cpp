#include "iontrap/mathieu.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <utility>

#include "iontrap/constants.hpp"
#include "iontrap/error.hpp"

namespace iontrap {
namespace {

using constants::pi;

struct IsotopeEntry {
  std::string_view name;
  double mass_u;
};

// Atomic masses in u.
constexpr IsotopeEntry isotope_table[] = {
    {"Be-9", 9.0121831},     {"Mg-24", 23.9850417},  {"Mg-25", 24.9858370},    {"Ca-40", 39.9626},
    {"Ca-43", 42.9587666},   {"Sr-86", 85.9092607},  {"Sr-88", 87.9056},       {"Ba-138", 137.9052472},
    {"Yb-171", 170.9363302}, {"Yb-172", 171.9363859}, {"Yb-174", 173.9388664},
};

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

// One RK4 sweep of u'' = -(a - 2 q cos 2xi) u over xi in [0, pi] from (u, u').
std::pair<double, double> propagate(double a, double q, int steps, double u, double v) {
  const double h = pi / steps;
  auto acc = [&](double xi, double x) { return -(a - 2.0 * q * std::cos(2.0 * xi)) * x; };
  for (int i = 0; i < steps; ++i) {
    const double xi = i * h;
    const double k1u = v, k1v = acc(xi, u);
    const double k2u = v + 0.5 * h * k1v, k2v = acc(xi + 0.5 * h, u + 0.5 * h * k1u);
    const double k3u = v + 0.5 * h * k2v, k3v = acc(xi + 0.5 * h, u + 0.5 * h * k2u);
    const double k4u = v + h * k3v, k4v = acc(xi + h, u + h * k3u);
    u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
    v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  }
  return {u, v};
}

double trace_at(double a, double q, int steps) {
  // M = [[u1, u2], [u1', u2']] with u1(0) = 1, u2'(0) = 1
  return propagate(a, q, steps, 1.0, 0.0).first + propagate(a, q, steps, 0.0, 1.0).second;
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw Error(std::string(what) + " must be positive");
}

} // namespace

IonSpecies IonSpecies::from_isotope(std::string_view isotope, int charge_state) {
  const auto m = isotope_mass_u(isotope);
  if (!m) throw ConfigError("unknown isotope '" + std::string(isotope) + "'");
  return from_mass_u(std::string(isotope), *m, charge_state);
}

IonSpecies IonSpecies::from_mass_u(std::string label, double mass_u, int charge_state) {
  if (!(mass_u > 0.0)) throw ConfigError("ion mass must be positive");
  if (charge_state == 0) throw ConfigError("ion charge state must be non-zero");
  return {std::move(label), mass_u * constants::atomic_mass_unit, charge_state * constants::elementary_charge};
}

std::optional<double> isotope_mass_u(std::string_view isotope) {
  for (const auto& e : isotope_table)
    if (e.name == isotope) return e.mass_u;
  return std::nullopt;
}

std::vector<std::string> known_isotopes() {
  std::vector<std::string> out;
  for (const auto& e : isotope_table) out.emplace_back(e.name);
  return out;
}

std::string_view to_string(BetaMethod m) {
  switch (m) {
    case BetaMethod::dehmelt: return "dehmelt";
    case BetaMethod::fourth_order: return "fourth_order";
    case BetaMethod::floquet: return "floquet";
    case BetaMethod::simulated: return "simulated";
  }
  return "unknown";
}

double analytic_quadrupole_potential(double r, double z, double r0, double z0, double U, double V, double omega,
                                     double t) {
  const double denom = r0 * r0 + 2.0 * z0 * z0;
  if (denom == 0.0) throw Error("analytic quadrupole potential: r0^2 + 2 z0^2 must be non-zero");
  return (r * r - 2.0 * z * z + 2.0 * z0 * z0) / denom * (U + V * std::cos(omega * t));
}

double analytic_linear_potential(double x, double y, double r0, double U, double V, double omega, double t) {
  require_positive(r0, "r0");
  return (x * x - y * y) / (r0 * r0) * (U + V * std::cos(omega * t));
}

StabilityParams endcap_stability_params(const IonSpecies& ion, double U, double V, double omega, double z0,
                                        double efficiency) {
  require_positive(omega, "RF angular frequency");
  require_positive(z0, "z0");
  if (!(efficiency > 0.0) || efficiency > 1.0) throw Error("trap efficiency must lie in (0, 1]");
  const double scale = efficiency * ion.charge / (ion.mass * z0 * z0 * omega * omega);
  const double axy = 2.0 * scale * U;
  const double qxy = -scale * V;
  return {{axy, axy, -2.0 * axy}, {qxy, qxy, -2.0 * qxy}};
}

StabilityParams linear_stability_params(const IonSpecies& ion, double U0, double V, double omega, double r0,
                                        double z0, double kappa) {
  require_positive(omega, "RF angular frequency");
  require_positive(r0, "r0");
  require_positive(z0, "z0");
  const double axy = -4.0 * ion.charge * kappa * U0 / (ion.mass * omega * omega * z0 * z0);
  const double qx = 4.0 * ion.charge * V / (ion.mass * omega * omega * r0 * r0);
  return {{axy, axy, -2.0 * axy}, {qx, -qx, 0.0}};
}

double beta_dehmelt(double a, double q) {
  const double r = a + 0.5 * q * q;
  if (r < 0.0) throw UnstableParametersError("Dehmelt beta undefined: a + q^2/2 = " + fmt(r) + " < 0");
  return std::sqrt(r);
}

bool dehmelt_applicable(double q, Axis axis) { return std::abs(q) < (axis == Axis::z ? 0.4 : 0.2); }

double beta_fourth_order(double a, double q) {
  const double am1 = a - 1.0;
  const double d1 = 2.0 * am1 * am1 - q * q;
  const double d2 = 32.0 * am1 * am1 * am1 * (a - 4.0);
  if (std::abs(d1) < 1e-12 || std::abs(d2) < 1e-12) {
    throw UnstableParametersError("fourth-order beta: vanishing denominator at a = " + fmt(a) + ", q = " + fmt(q));
  }
  const double q2 = q * q;
  const double r = a - am1 * q2 / d1 - (5.0 * a + 7.0) * q2 * q2 / d2;
  if (r < 0.0) throw UnstableParametersError("fourth-order beta undefined: radicand " + fmt(r) + " < 0");
  return std::sqrt(r);
}

double monodromy_trace(double a, double q, const FloquetOptions& options) {
  int n = std::max(4, options.initial_steps);
  double prev = trace_at(a, q, n);
  while (n < options.max_steps) {
    n *= 2;
    const double cur = trace_at(a, q, n);
    if (std::abs(cur - prev) < options.trace_tolerance) return cur;
    prev = cur;
  }
  throw SolverError("monodromy trace did not converge at a = " + fmt(a) + ", q = " + fmt(q));
}

double beta_floquet(double a, double q, const FloquetOptions& options) {
  const double tr = monodromy_trace(a, q, options);
  if (std::abs(tr) > 2.0) {
    throw UnstableParametersError("unstable Mathieu parameters a = " + fmt(a) + ", q = " + fmt(q) +
                                  ": |tr M| = " + fmt(std::abs(tr)) + " > 2");
  }
  return std::acos(0.5 * tr) / pi;
}

bool is_stable(double a, double q) {
  FloquetOptions o;
  o.trace_tolerance = 1e-8;
  return std::abs(monodromy_trace(a, q, o)) <= 2.0;
}

double critical_q(double a) {
  double lo = 0.0, hi = 1.5;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (monodromy_trace(a, mid) > -2.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SecularFrequencies secular_frequencies(const StabilityParams& p, double omega, BetaMethod method) {
  SecularFrequencies out;
  out.method = method;
  for (int u = 0; u < 3; ++u) {
    double b = 0.0;
    switch (method) {
      case BetaMethod::dehmelt: b = beta_dehmelt(p.a[u], p.q[u]); break;
      case BetaMethod::fourth_order: b = beta_fourth_order(p.a[u], p.q[u]); break;
      case BetaMethod::floquet:
        b = p.a[u] == 0.0 && p.q[u] == 0.0 ? 0.0 : beta_floquet(p.a[u], p.q[u]);
        break;
      case BetaMethod::simulated: throw Error("simulated frequencies come from trajectories, not from (a, q)");
    }
    out.beta[u] = b;
    out.omega[u] = 0.5 * b * omega;
  }
  return out;
}

std::vector<double> secular_frequency_ladder(double beta, double omega, int n_max) {
  std::vector<double> out{0.5 * beta * omega};
  for (int n = 1; n <= n_max; ++n) {
    out.push_back((n - 0.5 * beta) * omega);
    out.push_back((n + 0.5 * beta) * omega);
  }
  return out;
}

double linear_radial_frequency(const IonSpecies& ion, double V, double omega, double r0) {
  require_positive(omega, "RF angular frequency");
  require_positive(r0, "r0");
  return 2.0 * ion.charge * V / (std::sqrt(2.0) * ion.mass * omega * r0 * r0);
}

bool linear_radial_formula_applicable(double a, double q) { return std::abs(a) <= 0.1 * std::abs(q); }

double linear_axial_frequency(const IonSpecies& ion, double kappa, double U0, double z0) {
  require_positive(z0, "z0");
  const double r = 2.0 * ion.charge * kappa * U0 / (ion.mass * z0 * z0);
  if (r < 0.0) throw UnstableParametersError("axial potential is anti-confining (e kappa U0 < 0)");
  return std::sqrt(r);
}

double estimate_efficiency(double omega_z, const IonSpecies& ion, double V, double omega, double z0,
                           BetaModel model) {
  require_positive(omega, "RF angular frequency");
  require_positive(z0, "z0");
  require_positive(V, "RF amplitude");
  const double beta = 2.0 * omega_z / omega;
  if (beta == 0.0) return 0.0;
  if (!(beta > 0.0) || !(beta < 1.0)) throw UnstableParametersError("axial beta " + fmt(beta) + " outside (0, 1)");

  auto model_beta = [&](double q) {
    return model == BetaModel::fourth_order ? beta_fourth_order(0.0, q) : beta_floquet(0.0, q);
  };
  double lo = 0.0, hi = 0.908;
  if (model_beta(hi) < beta) {
    throw UnstableParametersError("axial beta " + fmt(beta) + " beyond the range of the beta model at a = 0");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (model_beta(mid) < beta ? lo : hi) = mid;
  }
  const double qz = 0.5 * (lo + hi);
  return qz * ion.mass * z0 * z0 * omega * omega / (2.0 * ion.charge * V);
}

double estimate_geometric_factor(double omega_z, const IonSpecies& ion, double U0, double z0) {
  if (U0 == 0.0) throw Error("geometric factor needs a non-zero ring voltage");
  require_positive(z0, "z0");
  return ion.mass * z0 * z0 * omega_z * omega_z / (2.0 * ion.charge * U0);
}

void write_stability_csv(std::ostream& os, double a_min, double a_max, int na, double q_min, double q_max, int nq) {
  if (na < 1 || nq < 1) throw Error("stability grid needs at least one point per direction");
  os << "a,q,stable,beta\n" << std::setprecision(10);
  auto at = [](double lo, double hi, int n, int i) { return n == 1 ? lo : lo + (hi - lo) * i / (n - 1); };
  FloquetOptions o;
  o.trace_tolerance = 1e-8;
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < nq; ++j) {
      const double a = at(a_min, a_max, na, i), q = at(q_min, q_max, nq, j);
      const double tr = monodromy_trace(a, q, o);
      const bool stable = std::abs(tr) <= 2.0;
      os << a << ',' << q << ',' << (stable ? 1 : 0) << ',';
      if (stable) os << std::acos(0.5 * tr) / pi;
      os << '\n';
    }
  }
}

} // namespace iontrap
