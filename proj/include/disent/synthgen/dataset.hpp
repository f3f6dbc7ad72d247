#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "disent/synthgen/factors.hpp"
#include "disent/synthgen/synth.hpp"

namespace disent {

struct LabeledSample {
  FeatureVector features;
  FactorAssignment labels;  // full ground truth, always present
  AnnotationMask mask;      // which labels training may look at
  std::uint64_t nuisance_seed = 0;

  bool fully_labeled() const;
  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

struct Dataset {
  FactorList factors;
  std::vector<LabeledSample> samples;
  std::string provenance;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  // Number of samples whose label for each factor is visible.
  std::vector<std::size_t> visibility_counts() const;
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Samples canonical-factor assignments uniformly and independently per factor,
// plus one nuisance seed per sample, all from Rng(seed).split("dataset").
Dataset make_dataset(std::size_t n_samples, const MaskPolicy& policy, std::uint64_t seed);

// Newline-delimited JSON: one header record, then one record per sample.
//   {"version":1,"factors":[{"name":..,"cardinality":..}],"seed":..,"provenance":..}
//   {"features":[128 reals],"labels":[..],"mask":[..],"nuisance_seed":..}
inline constexpr int kDatasetFormatVersion = 1;
void write_dataset(std::ostream& out, const Dataset& ds);
void save_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset(std::istream& in);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace disent
