#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace iontrap {

struct IonSpecies {
  std::string label;
  double mass = 0.0;    // kg
  double charge = 0.0;  // C

  /// Looks up the isotope table ("Sr-88", "Ca-40", ...). Throws ConfigError
  /// for unknown isotopes or a zero charge state.
  static IonSpecies from_isotope(std::string_view isotope, int charge_state = 1);
  static IonSpecies from_mass_u(std::string label, double mass_u, int charge_state = 1);
};

/// Atomic mass in u, if the isotope is tabulated.
std::optional<double> isotope_mass_u(std::string_view isotope);
std::vector<std::string> known_isotopes();

enum class Axis { x = 0, y = 1, z = 2 };

struct StabilityParams {
  std::array<double, 3> a{};
  std::array<double, 3> q{};

  double a_of(Axis u) const { return a[static_cast<int>(u)]; }
  double q_of(Axis u) const { return q[static_cast<int>(u)]; }
};

enum class BetaMethod { dehmelt, fourth_order, floquet, simulated };
std::string_view to_string(BetaMethod m);

struct SecularFrequencies {
  std::array<double, 3> omega{};  // rad/s
  std::array<double, 3> beta{};
  BetaMethod method = BetaMethod::fourth_order;
};

// ---- analytic potentials ----------------------------------------------------

/// (r^2 - 2 z^2 + 2 z0^2) / (r0^2 + 2 z0^2) * (U + V cos(Omega t))
double analytic_quadrupole_potential(double r, double z, double r0, double z0, double U, double V, double omega,
                                     double t);

/// (x^2 - y^2) / r0^2 * (U + V cos(Omega t))
double analytic_linear_potential(double x, double y, double r0, double U, double V, double omega, double t);

// ---- stability parameters ---------------------------------------------------

StabilityParams endcap_stability_params(const IonSpecies& ion, double U, double V, double omega, double z0,
                                        double efficiency);

StabilityParams linear_stability_params(const IonSpecies& ion, double U0, double V, double omega, double r0,
                                        double z0, double kappa);

// ---- characteristic exponent ------------------------------------------------

/// sqrt(a + q^2/2). Throws UnstableParametersError for a negative radicand.
double beta_dehmelt(double a, double q);

/// The lowest-order formula is trusted only for |q| < 0.2 radially and
/// |q| < 0.4 axially.
bool dehmelt_applicable(double q, Axis axis);

/// Fourth-order continued-fraction truncation. Throws UnstableParametersError
/// for a negative radicand or a vanishing denominator.
double beta_fourth_order(double a, double q);

struct FloquetOptions {
  double trace_tolerance = 1e-10;
  int initial_steps = 64;
  int max_steps = 1 << 20;
};

/// Trace of the one-period monodromy matrix of u'' + (a - 2 q cos 2xi) u = 0.
double monodromy_trace(double a, double q, const FloquetOptions& options = {});

/// arccos(tr M / 2) / pi. Throws UnstableParametersError when |tr M| > 2.
double beta_floquet(double a, double q, const FloquetOptions& options = {});

bool is_stable(double a, double q);

/// q on the a = const line where the first stability zone ends (tr M = -2),
/// found by bisection. Only meaningful for a near 0.
double critical_q(double a = 0.0);

SecularFrequencies secular_frequencies(const StabilityParams& p, double omega, BetaMethod method);

/// omega_n = (n +- beta/2) Omega; n = 0 yields only the fundamental.
std::vector<double> secular_frequency_ladder(double beta, double omega, int n_max);

/// 2 e V / (sqrt(2) m Omega r0^2)
double linear_radial_frequency(const IonSpecies& ion, double V, double omega, double r0);

/// The approximation needs |a| << |q|; false when |a| > 0.1 |q|.
bool linear_radial_formula_applicable(double a, double q);

/// sqrt(2 e kappa U0 / (m z0^2)). Throws UnstableParametersError when
/// e kappa U0 < 0.
double linear_axial_frequency(const IonSpecies& ion, double kappa, double U0, double z0);

enum class BetaModel { fourth_order, floquet };

/// Inverts omega_z = beta Omega / 2 for q_z at a = 0, then
/// epsilon = q_z m z0^2 Omega^2 / (2 e V).
double estimate_efficiency(double omega_z, const IonSpecies& ion, double V, double omega, double z0,
                           BetaModel model = BetaModel::fourth_order);

/// kappa = m z0^2 omega_z^2 / (2 e U0)
double estimate_geometric_factor(double omega_z, const IonSpecies& ion, double U0, double z0);

/// CSV a,q,stable,beta over an na x nq grid (inclusive ranges).
void write_stability_csv(std::ostream& os, double a_min, double a_max, int na, double q_min, double q_max, int nq);

} // namespace iontrap
