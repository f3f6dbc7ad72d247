#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "disent/metrics/metrics.hpp"
#include "disent/synthgen/factors.hpp"
#include "disent/trainer/config.hpp"
#include "json.hpp"

namespace disent {

// Everything one experiment needs, read from a single JSON object. Keys:
//   seed, n_samples, mask_policy                    data generation
//   lambda, gamma, lr_ae, lr_pred, momentum,
//   predictor_steps, batch_size, total_rounds,
//   adversarial_cap                                 training
//   probe_epochs, swap_pairs                        evaluation
//   dataset_out, train_data, model_out,
//   history_out, eval_train, eval_test, report_out  file paths
// Unknown keys and mistyped values raise ConfigError naming the key.
struct RunConfig {
  std::uint64_t seed = 1;
  std::size_t n_samples = 8000;
  MaskPolicy mask_policy = MaskPolicy::full();
  TrainConfig train;
  std::size_t probe_epochs = 500;
  std::size_t swap_pairs = 500;

  std::string dataset_out;
  std::vector<std::string> train_data;
  std::string model_out;
  std::string history_out;
  std::string eval_train;
  std::string eval_test;
  std::string report_out;

  // seed also seeds training.
  void set_seed(std::uint64_t s);
  EvalOptions eval_options() const;
  // Every field, defaults included, in a fixed order.
  nlohmann::ordered_json to_json() const;
};

RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace disent
