#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "iontrap/error.hpp"
#include "iontrap/spectral.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace iontrap;
using doctest::Approx;

namespace {

std::vector<double> tones(double rate, double duration, std::initializer_list<std::pair<double, double>> parts,
                          double noise = 0.0, unsigned seed = 1) {
  const auto n = static_cast<std::size_t>(std::llround(rate * duration));
  std::vector<double> x(n, 0.0);
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, noise > 0 ? noise : 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = i / rate;
    for (const auto& [f, a] : parts) x[i] += a * std::sin(2 * oracle::pi * f * t);
    if (noise > 0) x[i] += gauss(rng);
  }
  return x;
}

double power_at(const Spectrum& s, double f) {
  const auto i = static_cast<std::size_t>(std::llround(f / s.bin_width()));
  double best = 0;
  for (std::size_t k = i - 2; k <= i + 2; ++k) best = std::max(best, s.power[k]);
  return best;
}

} // namespace

TEST_CASE("spectrum layout") {
  const auto x = tones(50e6, 1e-3, {{1e6, 1.0}});
  const auto s = power_spectrum(x, 1 / 50e6);
  CHECK(s.window == "hann");
  CHECK(s.sample_rate == Approx(50e6));
  CHECK(s.fft_length == 4 * 65536);
  CHECK(s.frequency.size() == s.fft_length / 2 + 1);
  CHECK(s.frequency.back() == Approx(25e6));
  for (std::size_t i = 1; i < s.frequency.size(); ++i) {
    CHECK(s.frequency[i] - s.frequency[i - 1] == Approx(s.bin_width()).epsilon(1e-9));
  }
  double mx = 0;
  for (double p : s.power) {
    CHECK(p >= 0.0);
    mx = std::max(mx, p);
  }
  CHECK(mx == 1.0);
}

TEST_CASE("pure tone") {
  const auto x = tones(50e6, 1e-3, {{1e6, 1.0}});
  const auto s = power_spectrum(x, 1 / 50e6);
  std::size_t arg = 0;
  for (std::size_t i = 0; i < s.power.size(); ++i)
    if (s.power[i] > s.power[arg]) arg = i;
  CHECK(std::abs(s.frequency[arg] - 1e6) <= s.bin_width());
  const auto p = extract_secular_frequency(s, 0.5e6, 2e6);
  CHECK(p.interpolated);
  CHECK(std::abs(p.frequency - 1e6) < 1e3);
}

TEST_CASE("constant signal carries no power after mean subtraction") {
  const std::vector<double> x(4096, 3.7);
  const auto s = power_spectrum(x, 1e-8);
  const double scale = 3.7 * 3.7 * 4096;
  CHECK(s.peak_power < 1e-18 * scale * scale);
  CHECK(s.windowed_energy < 1e-18 * scale);
}

TEST_CASE("two tones") {
  const auto x = tones(50e6, 1e-3, {{0.7e6, 1.0}, {1.4e6, 0.5}});
  const auto s = power_spectrum(x, 1 / 50e6);
  CHECK(power_at(s, 0.7e6) / power_at(s, 1.4e6) == Approx(4.0).epsilon(0.1));
  CHECK(extract_secular_frequency(s, 0.3e6, 1.0e6).frequency == Approx(0.7e6).epsilon(1e-3));
  CHECK(extract_secular_frequency(s, 1.0e6, 2.0e6).frequency == Approx(1.4e6).epsilon(1e-3));
}

TEST_CASE("extraction errors") {
  const auto x = tones(50e6, 1e-3, {{1e6, 1.0}});
  const auto s = power_spectrum(x, 1 / 50e6);
  CHECK_THROWS_AS(extract_secular_frequency(s, 2e6, 2e6 + 1), SolverError); // no bins
  CHECK_THROWS_AS(extract_secular_frequency(s, 3e6, 1e6), SolverError);
  CHECK_THROWS_AS(power_spectrum(std::vector<double>(1023, 0.0), 1e-8), SolverError);
  CHECK_THROWS_AS(power_spectrum(std::vector<double>(2048, 0.0), 0.0), SolverError);
}

TEST_CASE("signal-free bands report an edge maximum") {
  Spectrum flat;
  flat.sample_rate = 1e6;
  flat.fft_length = 2000;
  for (int i = 0; i <= 1000; ++i) {
    flat.frequency.push_back(i * 500.0);
    flat.power.push_back(1e-6);
  }
  CHECK_THROWS_AS(extract_secular_frequency(flat, 1e4, 2e5), SolverError);

  Spectrum falling = flat;
  for (std::size_t i = 0; i < falling.power.size(); ++i) falling.power[i] = 1.0 / (1.0 + i);
  CHECK_THROWS_AS(extract_secular_frequency(falling, 1e4, 2e5), SolverError);
}

TEST_CASE("Parseval") {
  gen::Source src(31);
  for (int n = 0; n < 20; ++n) {
    const int len = src.integer(1024, 20000);
    std::vector<double> x(len);
    for (auto& v : x) v = src.uniform(-1, 1) + std::sin(0.01 * len * src.uniform(0, 1));
    const auto s = power_spectrum(x, 1e-7);
    CHECK(s.parseval_power() == Approx(s.windowed_energy).epsilon(1e-9));
  }
}

TEST_CASE("tone recovery at 20 dB SNR") {
  gen::Source src(32);
  for (int n = 0; n < 25; ++n) {
    const double f = src.uniform(0.3e6, 4e6);
    const double amp = 1.0;
    // SNR = (amp^2 / 2) / sigma^2 = 100
    const double sigma = std::sqrt(amp * amp / 2 / 100);
    const auto x = tones(20e6, 1e-3, {{f, amp}}, sigma, 100 + n);
    const auto s = power_spectrum(x, 1 / 20e6);
    const auto p = extract_secular_frequency(s, 0.2e6, 5e6);
    CHECK(std::abs(p.frequency - f) < std::max(1e3, 0.1 * s.bin_width()));
  }
}

TEST_CASE("spectrum CSV") {
  const auto s = power_spectrum(tones(1e6, 4e-3, {{1e5, 1.0}}), 1e-6);
  std::ostringstream os;
  write_spectrum_csv(os, s);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "frequency_hz,power_normalized");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    CHECK(line.find(',') != std::string::npos);
    ++rows;
  }
  CHECK(rows == s.frequency.size());
}
