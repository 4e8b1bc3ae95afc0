#include "iontrap/heating.hpp"

#include <cmath>
#include <limits>

#include "iontrap/constants.hpp"
#include "iontrap/error.hpp"

namespace iontrap {
namespace {

using namespace constants;

double rate_per_ohm(const HeatingInputs& in) {
  if (!(in.omega > 0.0)) throw Error("heating rate needs a positive secular frequency");
  if (!(in.distance > 0.0)) throw Error("heating rate needs a positive ion-electrode distance");
  if (!(in.temperature >= 0.0)) throw Error("temperature must be non-negative");
  const double e = in.species.charge;
  return e * e * boltzmann * in.temperature / (in.species.mass * in.distance * in.distance * hbar * in.omega);
}

} // namespace

double skin_depth(double resistivity, double frequency) {
  if (!(resistivity > 0.0) || !(frequency > 0.0)) throw Error("skin depth needs positive resistivity and frequency");
  return std::sqrt(2.0 * resistivity / (mu0 * 2.0 * pi * frequency));
}

double electrode_resistance(double resistivity, double length, double area, std::optional<double> skin_frequency) {
  if (!(resistivity > 0.0) || !(area > 0.0) || length < 0.0) {
    throw Error("electrode resistance needs positive resistivity and area and a non-negative length");
  }
  double effective = area;
  if (skin_frequency) {
    const double radius = std::sqrt(area / pi);
    const double delta = skin_depth(resistivity, *skin_frequency);
    if (delta < radius) effective = 2.0 * pi * radius * delta;
  }
  return resistivity * length / effective;
}

HeatingRate johnson_heating_rate(const HeatingInputs& in) {
  if (in.resistance < 0.0) throw Error("resistance must be non-negative");
  const double rate = rate_per_ohm(in) * in.resistance;
  return {rate, rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity()};
}

double resistance_for_heating_rate(double quanta_per_second, const HeatingInputs& in) {
  return quanta_per_second / rate_per_ohm(in);
}

} // namespace iontrap
