#include "disent/synthgen/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace disent {
namespace {

constexpr std::size_t kPitchClasses = kFundamentalsHz.size();
constexpr std::size_t kTimbreClasses = 3;

// Least-squares slope of e_t / mean(e) against t; 0 for silent input.
double normalised_slope(const std::array<double, kFrames>& e) {
  double mean = 0.0;
  for (double v : e) mean += v;
  mean /= static_cast<double>(kFrames);
  if (!(mean > 0.0)) return 0.0;
  const double tc = (static_cast<double>(kFrames) - 1.0) / 2.0;
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < kFrames; ++t) {
    const double dt = static_cast<double>(t) - tc;
    num += dt * (e[t] / mean - 1.0);
    den += dt * dt;
  }
  return num / den;
}

std::array<double, kHarmonics> energy_ratios(const std::array<double, kHarmonics>& e) {
  double total = 0.0;
  for (double v : e) total += v;
  std::array<double, kHarmonics> r{};
  if (total > 0.0)
    for (std::size_t h = 0; h < kHarmonics; ++h) r[h] = e[h] / total;
  return r;
}

}  // namespace

double rising_design_slope() {
  const auto g = envelope_gains(envelope_class::rising);
  std::array<double, kFrames> e{};
  for (std::size_t t = 0; t < kFrames; ++t) e[t] = g[t] * g[t];
  return normalised_slope(e);
}

FactorAssignment oracle_factors(const FeatureVector& features, OracleReading* reading) {
  std::array<std::array<double, kBands>, kFrames> energy{};
  std::array<double, kBands> band_total{};
  std::array<double, kFrames> frame_total{};
  double total = 0.0;
  for (std::size_t t = 0; t < kFrames; ++t)
    for (std::size_t b = 0; b < kBands; ++b) {
      const double e = std::expm1(std::max(features.at(t, b), 0.0));
      energy[t][b] = e;
      band_total[b] += e;
      frame_total[t] += e;
      total += e;
    }

  OracleReading r;
  for (std::size_t c = 0; c < kPitchClasses; ++c) {
    double on = 0.0;
    for (std::size_t h = 1; h <= kHarmonics; ++h) on += band_total[harmonic_band(c, h)];
    r.pitch_score[c] = total > 0.0 ? on / total : 0.0;
  }
  const std::size_t pitch = static_cast<std::size_t>(
      std::max_element(r.pitch_score.begin(), r.pitch_score.end()) - r.pitch_score.begin());

  r.envelope_slope = normalised_slope(frame_total);
  const double threshold = kFlatSlopeFraction * rising_design_slope();
  std::size_t envelope = envelope_class::flat;
  if (r.envelope_slope >= threshold) envelope = envelope_class::rising;
  else if (r.envelope_slope <= -threshold) envelope = envelope_class::falling;

  std::array<double, kHarmonics> harmonic_energy{};
  for (std::size_t h = 1; h <= kHarmonics; ++h) harmonic_energy[h - 1] = band_total[harmonic_band(pitch, h)];
  const auto observed = energy_ratios(harmonic_energy);
  for (std::size_t c = 0; c < kTimbreClasses; ++c) {
    const auto a = timbre_amplitudes(c);
    std::array<double, kHarmonics> sq{};
    for (std::size_t h = 0; h < kHarmonics; ++h) sq[h] = a[h] * a[h];
    const auto tmpl = energy_ratios(sq);
    double d = 0.0;
    for (std::size_t h = 0; h < kHarmonics; ++h) d += std::fabs(observed[h] - tmpl[h]);
    r.timbre_distance[c] = d;
  }
  const std::size_t timbre = static_cast<std::size_t>(
      std::min_element(r.timbre_distance.begin(), r.timbre_distance.end()) - r.timbre_distance.begin());

  if (reading != nullptr) *reading = r;
  FactorAssignment out(3);
  out[factor::pitch] = pitch;
  out[factor::envelope] = envelope;
  out[factor::timbre] = timbre;
  return out;
}

}  // namespace disent
