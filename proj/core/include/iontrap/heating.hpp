#pragma once

#include <optional>

#include "iontrap/mathieu.hpp"

namespace iontrap {

/// sqrt(2 rho / (mu0 2 pi f)), m.
double skin_depth(double resistivity, double frequency);

/// rho L / A for a round conductor of cross-section A. With a skin frequency
/// set and the skin depth smaller than the conductor radius, A becomes
/// perimeter * skin depth.
double electrode_resistance(double resistivity, double length, double cross_section_area,
                            std::optional<double> skin_frequency = std::nullopt);

struct HeatingInputs {
  double resistance = 0.0;    // Ohm
  double temperature = 300.0; // K
  double distance = 0.0;      // ion to electrode, m
  double omega = 0.0;         // secular angular frequency, rad/s
  IonSpecies species;
};

struct HeatingRate {
  double quanta_per_second = 0.0;
  double seconds_per_quantum = 0.0;  // infinity for a zero rate
};

/// e^2 k_B T R / (m z^2 hbar omega)
HeatingRate johnson_heating_rate(const HeatingInputs& in);

/// Resistance that produces `quanta_per_second` for the other inputs.
double resistance_for_heating_rate(double quanta_per_second, const HeatingInputs& in);

} // namespace iontrap
