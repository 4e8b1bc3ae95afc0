#pragma once

#include <span>
#include <vector>

namespace iontrap {

/// Voltage program of one electrode: v(t) = dc + amplitude * cos(omega t + phase).
struct DriveChannel {
  double dc = 0.0;         // V
  double amplitude = 0.0;  // V, zero-to-peak
  double omega = 0.0;      // rad/s
  double phase = 0.0;      // rad

  friend bool operator==(const DriveChannel&, const DriveChannel&) = default;
};

/// Per-electrode drive, indexed by electrode id.
struct DriveWaveform {
  std::vector<DriveChannel> channels;

  std::size_t size() const { return channels.size(); }

  /// Shared RF angular frequency (largest omega among channels with AC amplitude), 0 if static.
  double rf_omega() const;

  /// True if every channel is time independent.
  bool is_static() const;

  friend bool operator==(const DriveWaveform&, const DriveWaveform&) = default;
};

/// v_e(t) = U_e + V_e cos(omega_e t + phase_e), written into `out` (size = channel count).
void instantaneous_voltages(const DriveWaveform& drive, double t, std::span<double> out);
std::vector<double> instantaneous_voltages(const DriveWaveform& drive, double t);

} // namespace iontrap
