#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "disent/model/model.hpp"
#include "disent/synthgen/dataset.hpp"
#include "json.hpp"

namespace disent {

struct ProbeConfig {
  std::size_t hidden = 32;
  std::size_t epochs = 500;
  std::size_t batch_size = 64;
  double lr = 0.05;
  double momentum = 0.9;
  bool standardize = true;
};

// Test accuracy of a freshly initialised probe (in -> hidden -> classes,
// leaky ReLU, softmax) trained by minibatch SGD on `train_x`. With
// `standardize`, inputs are scaled per column by train-split statistics;
// constant columns are only centred.
double probe_accuracy(const Matrix& train_x, std::span<const std::size_t> train_y, const Matrix& test_x,
                      std::span<const std::size_t> test_y, std::size_t classes, std::uint64_t seed,
                      const ProbeConfig& config = {});

using ProbeMatrix = std::vector<std::vector<double>>;

// Entry (i, j): accuracy of a probe predicting factor j from latent z_i.
// Both splits must be non-empty and fully labeled. The model is not modified.
ProbeMatrix probe_matrix(const DisentangleModel& model, const Dataset& train, const Dataset& test,
                         std::uint64_t seed, const ProbeConfig& config = {});

std::vector<double> chance_levels(const FactorList& factors);
// max_{j != i} (A[i][j] - chance_j) per row.
std::vector<double> leakage_scores(const ProbeMatrix& probe, const std::vector<double>& chance);

// Mean L1 reconstruction per auto-encoder, decoding with ground-truth one-hots.
std::vector<double> reconstruction_report(const DisentangleModel& model, const Dataset& dataset);

struct SwapResult {
  FeatureVector features;
  FactorAssignment oracle;
  bool kept = false;     // oracle reads a's class for factor i
  bool swapped = false;  // oracle reads b's class for every j != i
  bool agreement() const noexcept { return kept && swapped; }
};

// Decodes a's latent for factor i with b's labels for every other factor and
// referees the result with the analytic oracle.
SwapResult swap_synthesis(const DisentangleModel& model, std::size_t i, const LabeledSample& a,
                          const LabeledSample& b);

struct SwapAgreement {
  std::size_t pairs = 0;
  double kept = 0.0;
  double swapped = 0.0;
  double joint = 0.0;
};

// Rates over `pairs` index pairs drawn uniformly (with replacement) from
// `dataset`, seeded per factor.
SwapAgreement swap_agreement(const DisentangleModel& model, std::size_t i, const Dataset& dataset,
                             std::size_t pairs, std::uint64_t seed);

inline constexpr int kReportFormatVersion = 1;

struct MetricsReport {
  FactorList factors;
  ProbeMatrix probe;
  std::vector<double> chance;
  std::vector<double> leakage;
  std::vector<double> recon_l1;
  std::vector<SwapAgreement> swap;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::uint64_t seed = 0;
};

struct EvalOptions {
  ProbeConfig probe;
  std::size_t swap_pairs = 500;
};

MetricsReport evaluate(const DisentangleModel& model, const Dataset& train, const Dataset& test,
                       std::uint64_t seed, const EvalOptions& options = {});

nlohmann::ordered_json report_to_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::ordered_json& doc);
void emit_report(const MetricsReport& report, const std::filesystem::path& path);
MetricsReport load_report(const std::filesystem::path& path);

}  // namespace disent
