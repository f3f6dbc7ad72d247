#include "disent/synthgen/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "disent/errors.hpp"
#include "disent/numerics/rng.hpp"
#include "json.hpp"

namespace disent {

using json = nlohmann::ordered_json;

bool LabeledSample::fully_labeled() const {
  return std::all_of(mask.begin(), mask.end(), [](bool v) { return v; });
}

std::vector<std::size_t> Dataset::visibility_counts() const {
  std::vector<std::size_t> counts(factors.size(), 0);
  for (const auto& s : samples)
    for (std::size_t f = 0; f < counts.size() && f < s.mask.size(); ++f) counts[f] += s.mask[f] ? 1 : 0;
  return counts;
}

Dataset make_dataset(std::size_t n_samples, const MaskPolicy& policy, std::uint64_t seed) {
  if (n_samples == 0) throw ArgumentError("make_dataset: n_samples must be >= 1");
  Dataset ds;
  ds.factors = canonical_factors();
  ds.seed = seed;
  ds.provenance = "synth:" + policy.to_string();
  const AnnotationMask mask = policy.mask_for(ds.factors.size());

  Rng rng = Rng(seed).split("dataset");
  ds.samples.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    LabeledSample s;
    s.labels.resize(ds.factors.size());
    for (const auto& f : ds.factors) s.labels[f.id] = rng.below(f.cardinality);
    s.nuisance_seed = rng.next_u64();
    s.mask = mask;
    s.features = featurize(synth_segment(s.labels, s.nuisance_seed));
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

void write_dataset(std::ostream& out, const Dataset& ds) {
  json header;
  header["version"] = kDatasetFormatVersion;
  json factors = json::array();
  for (const auto& f : ds.factors) factors.push_back({{"name", f.name}, {"cardinality", f.cardinality}});
  header["factors"] = std::move(factors);
  header["seed"] = ds.seed;
  header["provenance"] = ds.provenance;
  out << header.dump() << '\n';
  for (const auto& s : ds.samples) {
    json rec;
    rec["features"] = s.features.values;
    rec["labels"] = s.labels;
    json mask = json::array();
    for (bool b : s.mask) mask.push_back(b);
    rec["mask"] = std::move(mask);
    rec["nuisance_seed"] = s.nuisance_seed;
    out << rec.dump() << '\n';
  }
  if (!out) throw IoError("failed writing dataset");
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_dataset(out, ds);
}

Dataset read_dataset(std::istream& in) {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const json rec = json::parse(line);
      if (!have_header) {
        if (!rec.contains("version") || rec.at("version").get<int>() != kDatasetFormatVersion)
          throw FormatError("dataset: unsupported or missing version");
        std::size_t id = 0;
        for (const auto& f : rec.at("factors"))
          ds.factors.push_back({id++, f.at("name").get<std::string>(), f.at("cardinality").get<std::size_t>()});
        validate_factors(ds.factors);
        ds.seed = rec.at("seed").get<std::uint64_t>();
        ds.provenance = rec.value("provenance", std::string{});
        have_header = true;
        continue;
      }
      LabeledSample s;
      const auto& feats = rec.at("features");
      if (feats.size() != kFeatureDim) throw FormatError("dataset: feature vector must have 128 entries");
      for (std::size_t i = 0; i < kFeatureDim; ++i) s.features.values[i] = feats[i].get<double>();
      s.labels = rec.at("labels").get<FactorAssignment>();
      for (const auto& b : rec.at("mask")) s.mask.push_back(b.get<bool>());
      s.nuisance_seed = rec.at("nuisance_seed").get<std::uint64_t>();
      if (s.mask.size() != ds.factors.size()) throw FormatError("dataset: mask length mismatch");
      validate_assignment(ds.factors, s.labels);
      ds.samples.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw FormatError("dataset line " + std::to_string(line_no) + ": " + e.what());
  } catch (const ArgumentError& e) {
    throw FormatError("dataset line " + std::to_string(line_no) + ": " + e.what());
  }
  if (!have_header) throw FormatError("dataset: missing header record");
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_dataset(in);
}

}  // namespace disent
