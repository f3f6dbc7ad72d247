#pragma once

// Synthetic "speech-like" segments driven by three independent factors:
// pitch (fundamental), envelope (framewise gain) and timbre (harmonic rolloff).
// Every harmonic of every fundamental completes an integer number of cycles per
// 64-sample frame, so each harmonic lands in exactly one DFT bin.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include "disent/synthgen/factors.hpp"

namespace disent {

inline constexpr std::size_t kSegmentLength = 512;
inline constexpr double kSampleRate = 8000.0;
inline constexpr std::size_t kFrameLength = 64;
inline constexpr std::size_t kFrames = kSegmentLength / kFrameLength;  // 8
inline constexpr std::size_t kBands = 16;
inline constexpr std::size_t kFeatureDim = kFrames * kBands;  // 128
inline constexpr std::size_t kHarmonics = 4;
inline constexpr std::array<double, 4> kFundamentalsHz{250.0, 375.0, 500.0, 625.0};
inline constexpr double kPeakLevel = 0.9;
inline constexpr double kAmplitudeJitter = 0.10;

struct Segment {
  std::array<double, kSegmentLength> samples{};
};

// Log band energies, frame-major: values[frame * kBands + band].
struct FeatureVector {
  std::array<double, kFeatureDim> values{};

  double at(std::size_t frame, std::size_t band) const { return values[frame * kBands + band]; }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// Relative harmonic amplitudes (harmonics 1..4) for a timbre class.
std::array<double, kHarmonics> timbre_amplitudes(std::size_t timbre);
// Per-frame gain for an envelope class (rising / flat / falling).
std::array<double, kFrames> envelope_gains(std::size_t envelope);

// 64-point DFT bin of a frequency that sits exactly on the bin grid.
std::size_t dft_bin(double hz);
// Feature band holding DFT bin k (k in 1..32): bins {2b+1, 2b+2} form band b.
std::size_t band_of_bin(std::size_t bin);
std::size_t harmonic_band(std::size_t pitch, std::size_t harmonic);  // harmonic in 1..4

// Assignment must be valid for canonical_factors().
Segment synth_segment(const FactorAssignment& assignment, std::uint64_t nuisance_seed);

FeatureVector featurize(std::span<const double> samples);  // length must be 512
FeatureVector featurize(const Segment& segment);

}  // namespace disent
