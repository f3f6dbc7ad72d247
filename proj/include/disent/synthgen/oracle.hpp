#pragma once

#include <array>

#include "disent/synthgen/factors.hpp"
#include "disent/synthgen/synth.hpp"

namespace disent {

// Intermediate readings, exposed for diagnostics and tests.
struct OracleReading {
  std::array<double, 4> pitch_score{};   // fraction of energy on each class's harmonic bands
  double envelope_slope = 0.0;           // LS slope of mean-normalised frame energy
  std::array<double, 3> timbre_distance{};  // L1 to each rolloff template
};

// Recovers factor classes analytically from features produced by featurize().
//   pitch    - class whose four harmonic bands hold the largest share of energy
//   envelope - sign of the least-squares slope of per-frame energy; |slope| below
//              kFlatSlopeFraction of the rising design slope reads as flat
//   timbre   - template nearest (L1) to the observed harmonic energy ratios
// Negative entries (possible in reconstructions) are treated as zero energy.
FactorAssignment oracle_factors(const FeatureVector& features, OracleReading* reading = nullptr);

inline constexpr double kFlatSlopeFraction = 0.25;
// Slope the oracle measures for a noiseless rising segment.
double rising_design_slope();

}  // namespace disent
