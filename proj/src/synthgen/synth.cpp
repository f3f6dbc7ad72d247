#include "disent/synthgen/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "disent/errors.hpp"
#include "disent/numerics/rng.hpp"

namespace disent {
namespace {

constexpr std::size_t kBins = kFrameLength / 2;  // bins 1..32 feed the bands

struct DftTable {
  std::array<std::array<double, kFrameLength>, kBins + 1> cos{};
  std::array<std::array<double, kFrameLength>, kBins + 1> sin{};
  DftTable() {
    for (std::size_t k = 0; k <= kBins; ++k)
      for (std::size_t n = 0; n < kFrameLength; ++n) {
        // Reduce k*n modulo the frame length so the angle stays exact.
        const double angle = 2.0 * std::numbers::pi * static_cast<double>((k * n) % kFrameLength) /
                             static_cast<double>(kFrameLength);
        cos[k][n] = std::cos(angle);
        sin[k][n] = std::sin(angle);
      }
  }
};

const DftTable& dft_table() {
  static const DftTable table;
  return table;
}

}  // namespace

std::array<double, kHarmonics> timbre_amplitudes(std::size_t timbre) {
  switch (timbre) {
    case timbre_class::bright:
      return {1.0, 0.9, 0.8, 0.7};
    case timbre_class::neutral:
      return {1.0, 0.6, 0.36, 0.216};
    case timbre_class::dark:
      return {1.0, 0.3, 0.09, 0.027};
    default:
      throw ArgumentError("timbre class " + std::to_string(timbre) + " out of range");
  }
}

std::array<double, kFrames> envelope_gains(std::size_t envelope) {
  std::array<double, kFrames> g{};
  for (std::size_t t = 0; t < kFrames; ++t) {
    const double ramp = 0.25 + 0.75 * static_cast<double>(t) / static_cast<double>(kFrames - 1);
    switch (envelope) {
      case envelope_class::rising:
        g[t] = ramp;
        break;
      case envelope_class::flat:
        g[t] = 1.0;
        break;
      case envelope_class::falling:
        g[kFrames - 1 - t] = ramp;
        break;
      default:
        throw ArgumentError("envelope class " + std::to_string(envelope) + " out of range");
    }
  }
  return g;
}

std::size_t dft_bin(double hz) {
  return static_cast<std::size_t>(std::lround(hz * kFrameLength / kSampleRate));
}

std::size_t band_of_bin(std::size_t bin) { return (bin - 1) / 2; }

std::size_t harmonic_band(std::size_t pitch, std::size_t harmonic) {
  return band_of_bin(dft_bin(kFundamentalsHz.at(pitch) * static_cast<double>(harmonic)));
}

Segment synth_segment(const FactorAssignment& assignment, std::uint64_t nuisance_seed) {
  validate_assignment(canonical_factors(), assignment);
  const double f0 = kFundamentalsHz[assignment[factor::pitch]];
  const auto amps = timbre_amplitudes(assignment[factor::timbre]);
  const auto gains = envelope_gains(assignment[factor::envelope]);

  Rng rng(nuisance_seed);
  std::array<double, kHarmonics> phase{};
  std::array<double, kHarmonics> amp{};
  for (auto& p : phase) p = rng.uniform(0.0, 2.0 * std::numbers::pi);
  for (std::size_t h = 0; h < kHarmonics; ++h)
    amp[h] = amps[h] * rng.uniform(1.0 - kAmplitudeJitter, 1.0 + kAmplitudeJitter);

  Segment seg;
  double peak = 0.0;
  for (std::size_t n = 0; n < kSegmentLength; ++n) {
    double v = 0.0;
    for (std::size_t h = 0; h < kHarmonics; ++h) {
      const double hz = f0 * static_cast<double>(h + 1);
      v += amp[h] * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(n) / kSampleRate +
                             phase[h]);
    }
    v *= gains[n / kFrameLength];
    seg.samples[n] = v;
    peak = std::max(peak, std::fabs(v));
  }
  if (peak > 0.0)
    for (double& s : seg.samples) s *= kPeakLevel / peak;
  return seg;
}

FeatureVector featurize(std::span<const double> samples) {
  if (samples.size() != kSegmentLength)
    throw DimensionError("featurize: segment must have " + std::to_string(kSegmentLength) +
                         " samples, got " + std::to_string(samples.size()));
  const DftTable& dft = dft_table();
  FeatureVector fv;
  for (std::size_t t = 0; t < kFrames; ++t) {
    const double* frame = samples.data() + t * kFrameLength;
    std::array<double, kBands> energy{};
    for (std::size_t k = 1; k <= kBins; ++k) {
      double re = 0.0, im = 0.0;
      for (std::size_t n = 0; n < kFrameLength; ++n) {
        re += frame[n] * dft.cos[k][n];
        im -= frame[n] * dft.sin[k][n];
      }
      energy[band_of_bin(k)] += re * re + im * im;
    }
    for (std::size_t b = 0; b < kBands; ++b) fv.values[t * kBands + b] = std::log1p(energy[b]);
  }
  return fv;
}

FeatureVector featurize(const Segment& segment) { return featurize(std::span<const double>(segment.samples)); }

}  // namespace disent
