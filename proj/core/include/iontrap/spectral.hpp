#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace iontrap {

/// One-sided power spectrum of a Hann-windowed, mean-subtracted record
/// zero-padded to 4x the next power of two.
struct Spectrum {
  std::vector<double> frequency;  // Hz, uniform from 0 to Nyquist
  std::vector<double> power;      // normalized to max = 1
  std::string window = "hann";
  double sample_rate = 0.0;       // Hz
  std::size_t fft_length = 0;
  double peak_power = 0.0;        // raw power of the strongest bin (normalization)
  double windowed_energy = 0.0;   // sum of squared windowed samples

  double bin_width() const { return sample_rate / static_cast<double>(fft_length); }
  /// Raw one-sided power summed over all bins, divided by fft_length; equals
  /// windowed_energy (Parseval).
  double parseval_power() const;
};

struct SpectralPeak {
  double frequency = 0.0;  // Hz
  double power = 0.0;      // normalized
  bool interpolated = false;
};

inline constexpr std::size_t min_spectrum_samples = 1024;

/// Throws SolverError for fewer than 1024 samples or a non-positive dt.
Spectrum power_spectrum(std::span<const double> samples, double dt);

/// Strongest bin with f_lo <= f <= f_hi, refined by a parabola through the
/// log power of it and its neighbours. Throws SolverError when the band is
/// empty or the maximum sits on a band edge.
SpectralPeak extract_secular_frequency(const Spectrum& spectrum, double f_lo, double f_hi);

/// frequency_hz,power_normalized
void write_spectrum_csv(std::ostream& os, const Spectrum& spectrum);

} // namespace iontrap
