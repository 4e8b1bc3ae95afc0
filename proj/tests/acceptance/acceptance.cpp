// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "iontrap/error.hpp"
#include "iontrap/field_bem.hpp"
#include "iontrap/geometry.hpp"
#include "iontrap/heating.hpp"
#include "iontrap/mathieu.hpp"
#include "iontrap/pipeline.hpp"
#include "iontrap/scenario.hpp"
#include "iontrap/spectral.hpp"
#include "support/oracles.hpp"

using namespace iontrap;
namespace fs = std::filesystem;

namespace {

// ---- pinned tolerances ------------------------------------------------------

constexpr double sphere_tol = 0.01;
constexpr double sphere_seconds = 10.0;
constexpr std::size_t sphere_min_panels = 2048;

constexpr double bem_mean_error_tol = 0.01;
constexpr double compare_seconds = 120.0;

constexpr double ladder_tol = 1e-3;
constexpr double sqrt_a_tol = 1e-8;
constexpr double ladder_seconds = 1.0;

constexpr double floquet_closure_tol = 0.005;
constexpr double floquet_seconds = 60.0;

constexpr double table_bem_tol = 0.03;
constexpr double table_experiment_tol = 0.05;
constexpr double table_short_tol = 0.05;
constexpr double table_short_duration = 0.25e-3;
constexpr double table_seconds = 1200.0;

constexpr double analytic_efficiency = 0.63;
constexpr double analytic_axial_hz = 2.94e6;
constexpr double analytic_tol = 0.01;
constexpr double analytic_oracle_tol = 1e-3;

constexpr double linear_tol = 0.03;
constexpr double kappa_ref = 0.050;
constexpr double kappa_tol = 0.10;
constexpr double linear_seconds = 1200.0;

constexpr double heating_seconds_ref = 0.670;
constexpr double heating_tol = 0.02;
constexpr double heating_runtime = 1.0;

constexpr double tone_tol_hz = 1e3;
constexpr double parseval_tol = 1e-9;
constexpr double spectral_seconds = 5.0;

// ---- reference values (Hz) --------------------------------------------------

struct EndcapRow {
  const char* scenario;
  double radial_bem, axial_bem, radial_exp, axial_exp;
};

constexpr EndcapRow endcap_sets[] = {
    {"npl_set1", 1.403e6, 2.939e6, 1.395e6, 2.985e6}, {"npl_set2", 1.596e6, 3.265e6, 1.590e6, 3.360e6},
    {"npl_set3", 1.789e6, 3.767e6, 1.800e6, 3.795e6}, {"npl_set4", 1.980e6, 4.281e6, 1.980e6, 4.340e6},
    {"npl_set5", 2.227e6, 4.960e6, 2.230e6, 5.070e6},
};

constexpr double innsbruck_radial = 1.396e6;
constexpr double innsbruck_axial = 7.02e5;

// ---- helpers ----------------------------------------------------------------

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double rel(double value, double ref) { return std::abs(value - ref) / std::abs(ref); }

struct Outcome {
  bool pass = false;
  std::string summary;
};

void detail(const char* fmt, auto... args) {
  std::printf("    ");
  std::printf(fmt, args...);
  std::printf("\n");
  std::fflush(stdout);
}

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

RunOptions quiet_run(std::optional<double> duration = std::nullopt) {
  RunOptions o;
  o.write_files = false;
  o.duration = duration;
  return o;
}

// ---- criteria ---------------------------------------------------------------

Outcome sphere_capacitance() {
  const auto t0 = Clock::now();
  auto panels = mesh_surface(Sphere{1.0, {}}, {64, 32});
  const auto n = panels.size();
  auto geom = std::make_shared<const TrapGeometry>(
      TrapGeometry::from_panels("sphere", std::move(panels), {"sphere"}, 1.0, 1.0));
  const auto field = BemField::solve(geom);
  const double one[] = {1.0};
  const double ratio = total_charge(field->basis(), *geom, one) / (4 * oracle::pi * oracle::eps0);
  const double s = since(t0);
  return {n >= sphere_min_panels && std::abs(ratio - 1) < sphere_tol && s < sphere_seconds,
          format("Q/(4 pi eps0) = %.5f (tol %.0f%%), %zu panels, %.2f s (limit %.0f s)", ratio, sphere_tol * 100, n, s,
                 sphere_seconds)};
}

struct CompareResult {
  bool ran = false;
  bool ordering = false;
};

Outcome ideal_accuracy(const fs::path& dir, CompareResult& out) {
  const auto t0 = Clock::now();
  const auto sc = Scenario::load(dir / "ideal_quadrupole.cfg");
  const auto rows = compare_methods(sc);
  const double s = since(t0);
  const MethodError* bem = nullptr;
  const MethodError* fdm = nullptr;
  for (const auto& r : rows) {
    detail("%s %s: mean %.3e max %.3e (%.2f s)", r.method.c_str(), r.size.c_str(), r.mean_potential_error,
           r.max_potential_error, r.seconds);
    if (r.method == "bem" && !bem) bem = &r;
    if (r.method == "fdm" && !fdm) fdm = &r;
  }
  if (!bem || !fdm) return {false, "comparison is missing a method"};
  out.ran = true;
  // FDM gets at least the BEM wall-clock, so a larger error is an ordering at matched cost
  out.ordering = fdm->mean_potential_error > bem->mean_potential_error && fdm->seconds >= bem->seconds;
  const bool pass = bem->mean_potential_error < bem_mean_error_tol && out.ordering && s < compare_seconds;
  return {pass, format("BEM mean error %.4f (tol %.2f); FDM %.4f in %.2f s vs BEM %.2f s; %.1f s (limit %.0f s)",
                       bem->mean_potential_error, bem_mean_error_tol, fdm->mean_potential_error, fdm->seconds,
                       bem->seconds, s, compare_seconds)};
}

Outcome mathieu_ladder() {
  const auto t0 = Clock::now();
  double worst_q = 0.0, worst_a = 0.0;
  for (double q : {0.1, 0.2, 0.3, 0.4, 0.5})
    worst_q = std::max(worst_q, std::abs(beta_fourth_order(0.0, q) - beta_floquet(0.0, q)));
  for (double a : {0.01, 0.04, 0.25}) worst_a = std::max(worst_a, std::abs(beta_floquet(a, 0.0) - std::sqrt(a)));
  const double s = since(t0);
  return {worst_q < ladder_tol && worst_a < sqrt_a_tol && s < ladder_seconds,
          format("max |fourth - floquet| = %.2e (tol %.0e), max |floquet - sqrt a| = %.2e (tol %.0e), %.3f s",
                 worst_q, ladder_tol, worst_a, sqrt_a_tol, s)};
}

Outcome floquet_closure(const fs::path& dir) {
  const auto t0 = Clock::now();
  const auto sc = Scenario::load(dir / "ideal_quadrupole.cfg");
  const auto rep = run_scenario(sc, quiet_run());
  const double s = since(t0);
  if (!rep.axial_frequency || !rep.stability) return {false, "no axial frequency extracted"};
  const double a = rep.stability->a_of(Axis::z) + 0.0, q = rep.stability->q_of(Axis::z);
  const double expect = beta_floquet(a, q) * rep.rf_frequency / 2;
  const double err = rel(*rep.axial_frequency, expect);
  return {err < floquet_closure_tol && s < floquet_seconds,
          format("a = %.3g q = %.4f: %.1f Hz vs %.1f Hz, error %.3f%% (tol %.1f%%), %.1f s", a, q,
                 *rep.axial_frequency, expect, err * 100, floquet_closure_tol * 100, s)};
}

Outcome table_regression(const fs::path& dir) {
  const auto t0 = Clock::now();
  bool pass = true;
  double worst_full = 0.0, worst_exp = 0.0, worst_short = 0.0;
  for (const auto& row : endcap_sets) {
    const auto ts = Clock::now();
    const auto sc = Scenario::load(dir / (std::string(row.scenario) + ".cfg"));
    const auto field = prepare_field(sc);
    const auto full = run_scenario(sc, field, quiet_run());
    const auto brief = run_scenario(sc, field, quiet_run(table_short_duration));
    if (!full.radial_frequency || !full.axial_frequency || !brief.radial_frequency || !brief.axial_frequency) {
      detail("%s: frequencies not extracted", row.scenario);
      pass = false;
      continue;
    }
    const double r = *full.radial_frequency, z = *full.axial_frequency;
    const double rb = rel(r, row.radial_bem), zb = rel(z, row.axial_bem);
    const double re = rel(r, row.radial_exp), ze = rel(z, row.axial_exp);
    const double rs = rel(*brief.radial_frequency, row.radial_bem), zs = rel(*brief.axial_frequency, row.axial_bem);
    const bool ok = rb < table_bem_tol && zb < table_bem_tol && re < table_experiment_tol &&
                    ze < table_experiment_tol && rs < table_short_tol && zs < table_short_tol;
    pass = pass && ok;
    worst_full = std::max({worst_full, rb, zb});
    worst_exp = std::max({worst_exp, re, ze});
    worst_short = std::max({worst_short, rs, zs});
    detail("%s: radial %.4f MHz (bem %+.2f%%, exp %+.2f%%) axial %.4f MHz (bem %+.2f%%, exp %+.2f%%); "
           "0.25 ms: %+.2f%% / %+.2f%%; %.1f s %s",
           row.scenario, r / 1e6, (r / row.radial_bem - 1) * 100, (r / row.radial_exp - 1) * 100, z / 1e6,
           (z / row.axial_bem - 1) * 100, (z / row.axial_exp - 1) * 100,
           (*brief.radial_frequency / row.radial_bem - 1) * 100, (*brief.axial_frequency / row.axial_bem - 1) * 100,
           since(ts), ok ? "ok" : "out of tolerance");
  }
  const double s = since(t0);
  return {pass && s < table_seconds,
          format("worst vs BEM %.2f%% (tol %.0f%%), vs experiment %.2f%% (tol %.0f%%), 0.25 ms vs BEM %.2f%% "
                 "(tol %.0f%%), %.0f s (limit %.0f s)",
                 worst_full * 100, table_bem_tol * 100, worst_exp * 100, table_experiment_tol * 100,
                 worst_short * 100, table_short_tol * 100, s, table_seconds)};
}

Outcome analytic_cross_check() {
  const auto ion = IonSpecies::from_isotope("Sr-88");
  const double v = 199.0 * std::sqrt(2.0);
  const double f_rf = 15.955e6;
  const double omega = 2 * oracle::pi * f_rf;
  const double z0 = 0.28e-3;
  const auto p = endcap_stability_params(ion, 0.0, v, omega, z0, analytic_efficiency);
  const auto sf = secular_frequencies(p, omega, BetaMethod::fourth_order);
  const double fz = sf.omega[2] / (2 * oracle::pi);

  // constants chain evaluated independently of the library
  const double m = 87.9056 * oracle::u;
  const double qz = 2 * analytic_efficiency * oracle::e * v / (m * z0 * z0 * omega * omega);
  const double fz_oracle = oracle::beta_continued_fraction(0.0, qz) * f_rf / 2;

  const double err = rel(fz, analytic_axial_hz);
  const double agree = rel(fz, fz_oracle);
  return {err < analytic_tol && agree < analytic_oracle_tol,
          format("q_z = %.4f, axial %.4f MHz vs %.2f MHz, error %.2f%% (tol %.0f%%); independent chain %.4f MHz",
                 qz, fz / 1e6, analytic_axial_hz / 1e6, err * 100, analytic_tol * 100, fz_oracle / 1e6)};
}

Outcome innsbruck(const fs::path& dir) {
  const auto t0 = Clock::now();
  const auto sc = Scenario::load(dir / "innsbruck_default.cfg");
  const auto rep = run_scenario(sc, quiet_run());
  const double s = since(t0);
  if (!rep.radial_frequency || !rep.axial_frequency || !rep.kappa_estimate)
    return {false, "frequencies or kappa not extracted"};
  const double r = *rep.radial_frequency, z = *rep.axial_frequency, k = *rep.kappa_estimate;
  const bool pass = rel(r, innsbruck_radial) < linear_tol && rel(z, innsbruck_axial) < linear_tol &&
                    rel(k, kappa_ref) < kappa_tol && s < linear_seconds;
  return {pass, format("radial %.4f MHz (%+.2f%%), axial %.1f kHz (%+.2f%%) (tol %.0f%%); kappa %.4f (%+.1f%%, tol "
                       "%.0f%%); %.0f s",
                       r / 1e6, (r / innsbruck_radial - 1) * 100, z / 1e3, (z / innsbruck_axial - 1) * 100,
                       linear_tol * 100, k, (k / kappa_ref - 1) * 100, kappa_tol * 100, s)};
}

Outcome heating() {
  const auto t0 = Clock::now();
  HeatingInputs in;
  in.resistance = 1.24;
  in.temperature = 300.0;
  in.distance = 1.2e-3;
  in.omega = 2 * oracle::pi * 1.396e6;
  in.species = IonSpecies::from_isotope("Ca-40");
  const auto h = johnson_heating_rate(in);
  const double s = since(t0);
  const double err = rel(h.seconds_per_quantum, heating_seconds_ref);
  return {err < heating_tol && s < heating_runtime,
          format("%.1f ms per quantum vs %.0f ms, error %.2f%% (tol %.0f%%)", h.seconds_per_quantum * 1e3,
                 heating_seconds_ref * 1e3, err * 100, heating_tol * 100)};
}

Outcome spectral_suite() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> freq(0.3e6, 4e6), unit(-1.0, 1.0);
  const double rate = 20e6, duration = 1e-3;
  const auto n = static_cast<std::size_t>(rate * duration);
  // SNR = (1/2) / sigma^2 = 100, i.e. 20 dB
  std::normal_distribution<double> noise(0.0, std::sqrt(0.5 / 100));
  double worst_tone = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double f = freq(rng);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2 * oracle::pi * f * i / rate) + noise(rng);
    const auto p = extract_secular_frequency(power_spectrum(x, 1 / rate), 0.2e6, 5e6);
    worst_tone = std::max(worst_tone, std::abs(p.frequency - f));
  }
  double worst_parseval = 0.0;
  for (std::size_t len : {1024u, 4099u, 20000u}) {
    std::vector<double> x(len);
    for (auto& v : x) v = unit(rng);
    const auto s = power_spectrum(x, 1e-7);
    worst_parseval = std::max(worst_parseval, rel(s.parseval_power(), s.windowed_energy));
  }
  const double s = since(t0);
  return {worst_tone < tone_tol_hz && worst_parseval < parseval_tol && s < spectral_seconds,
          format("worst tone offset %.1f Hz (tol %.0f Hz), Parseval %.1e (tol %.0e), %.2f s", worst_tone, tone_tol_hz,
                 worst_parseval, parseval_tol, s)};
}

Outcome fdm_caveat(const CompareResult& c) {
  if (!c.ran) return {false, "method comparison did not run"};
  return {c.ordering, c.ordering ? "FDM error exceeds BEM at no less wall-clock; ordering substitutes for the "
                                   "tool-specific accuracy figure"
                                 : "FDM is not less accurate than BEM at matched wall-clock"};
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"iontrap acceptance suite"};
  std::string scenario_dir = std::string(IONTRAP_SOURCE_DIR) + "/scenarios";
  std::vector<int> only;
  app.add_option("--scenarios", scenario_dir, "directory with the bundled scenarios")->check(CLI::ExistingDirectory);
  app.add_option("--only", only, "run only these criteria")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const fs::path dir(scenario_dir);
  CompareResult compare;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"sphere capacitance", [] { return sphere_capacitance(); }},
      {"ideal quadrupole field accuracy", [&] { return ideal_accuracy(dir, compare); }},
      {"Mathieu ladder", [] { return mathieu_ladder(); }},
      {"trajectory-Floquet closure", [&] { return floquet_closure(dir); }},
      {"endcap secular frequency table", [&] { return table_regression(dir); }},
      {"analytic endcap cross-check", [] { return analytic_cross_check(); }},
      {"linear trap", [&] { return innsbruck(dir); }},
      {"Johnson heating", [] { return heating(); }},
      {"spectral synthetic suite", [] { return spectral_suite(); }},
      {"FDM accuracy caveat", [&] { return fdm_caveat(compare); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto& [name, run] = criteria[i];
    std::printf("[%2d] %s\n", id, name);
    std::fflush(stdout);
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.summary.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
