#include "iontrap/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <iomanip>
#include <memory>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>

#include "iontrap/constants.hpp"
#include "iontrap/error.hpp"

namespace iontrap {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

} // namespace

double Spectrum::parseval_power() const {
  long double sum = 0.0L;
  for (double p : power) sum += p;
  return static_cast<double>(sum * peak_power / static_cast<long double>(fft_length));
}

Spectrum power_spectrum(std::span<const double> samples, double dt) {
  const std::size_t n = samples.size();
  if (n < min_spectrum_samples) {
    throw SolverError("power spectrum needs at least " + std::to_string(min_spectrum_samples) + " samples, got " +
                      std::to_string(n));
  }
  if (!(dt > 0.0)) throw SolverError("power spectrum needs a positive sample interval");

  const std::size_t nfft = 4 * std::bit_ceil(n);
  std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * nfft)));
  std::unique_ptr<fftw_complex, FftwFree> out(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (nfft / 2 + 1))));
  if (!in || !out) throw SolverError("FFT buffer allocation failed");

  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(nfft), in.get(), out.get(), FFTW_ESTIMATE);
  }
  if (!plan) throw SolverError("FFT planning failed");

  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
  Spectrum s;
  s.sample_rate = 1.0 / dt;
  s.fft_length = nfft;
  double* x = in.get();
  long double energy = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 0.5 * (1.0 - std::cos(2.0 * constants::pi * static_cast<double>(i) / static_cast<double>(n - 1)));
    x[i] = w * (samples[i] - mean);
    energy += static_cast<long double>(x[i]) * x[i];
  }
  std::fill(x + n, x + nfft, 0.0);
  s.windowed_energy = static_cast<double>(energy);

  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }

  const std::size_t nbins = nfft / 2 + 1;
  s.frequency.resize(nbins);
  s.power.resize(nbins);
  const fftw_complex* X = out.get();
  for (std::size_t k = 0; k < nbins; ++k) {
    const double p = X[k][0] * X[k][0] + X[k][1] * X[k][1];
    s.power[k] = (k == 0 || k == nbins - 1) ? p : 2.0 * p;
    s.frequency[k] = static_cast<double>(k) * s.sample_rate / static_cast<double>(nfft);
  }
  s.peak_power = *std::max_element(s.power.begin(), s.power.end());
  if (s.peak_power > 0.0)
    for (double& p : s.power) p /= s.peak_power;
  return s;
}

SpectralPeak extract_secular_frequency(const Spectrum& s, double f_lo, double f_hi) {
  if (s.frequency.size() < 3) throw SolverError("spectrum too short for peak extraction");
  const double df = s.bin_width();
  if (!(f_hi > f_lo)) throw SolverError("empty frequency band");
  const auto first = static_cast<std::size_t>(std::ceil(std::max(f_lo, 0.0) / df));
  const auto last = std::min(static_cast<std::size_t>(std::floor(f_hi / df)), s.frequency.size() - 1);
  if (first > last) throw SolverError("frequency band contains no spectral bins");

  std::size_t best = first;
  for (std::size_t k = first; k <= last; ++k)
    if (s.power[k] > s.power[best]) best = k;

  std::ostringstream band;
  band << std::setprecision(6) << '[' << f_lo << ", " << f_hi << "] Hz";
  if (best == first || best == last) {
    throw SolverError("ambiguous extraction: spectral maximum on the edge of band " + band.str());
  }
  if (!(s.power[best] > 0.0)) throw SolverError("no spectral power in band " + band.str());

  auto lp = [&](std::size_t k) { return std::log(std::max(s.power[k], 1e-300)); };
  const double ym = lp(best - 1), y0 = lp(best), yp = lp(best + 1);
  const double curvature = ym - 2.0 * y0 + yp;
  SpectralPeak peak{s.frequency[best], s.power[best], false};
  if (curvature < 0.0) {
    const double delta = 0.5 * (ym - yp) / curvature;
    peak.frequency += delta * df;
    peak.power = std::exp(y0 - 0.25 * (ym - yp) * delta);
    peak.interpolated = true;
  }
  return peak;
}

void write_spectrum_csv(std::ostream& os, const Spectrum& s) {
  os << "frequency_hz,power_normalized\n" << std::setprecision(12);
  for (std::size_t k = 0; k < s.frequency.size(); ++k) os << s.frequency[k] << ',' << s.power[k] << '\n';
}

} // namespace iontrap
