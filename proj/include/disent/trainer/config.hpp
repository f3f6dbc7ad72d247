#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace disent {

struct TrainConfig {
  // Adversarial weight per target factor; empty means 0.5 for every factor.
  std::vector<double> lambda;
  double gamma = 0.5;  // weight of the certainty penalty on unlabeled targets
  double lr_ae = 0.01;
  double lr_pred = 0.05;
  double momentum = 0.9;
  std::size_t predictor_steps = 5;  // predictor steps per auto-encoder step
  std::size_t batch_size = 64;
  std::size_t total_rounds = 3000;
  // Each lambda_j * L_ij is capped here before the min is taken.
  double adversarial_cap = 10.0;
  std::uint64_t seed = 1;

  static constexpr double kDefaultLambda = 0.5;

  double lambda_for(std::size_t factor) const;
  // lambda expanded to n entries.
  std::vector<double> lambdas(std::size_t n_factors) const;
  // Throws ArgumentError naming the offending field.
  void validate(std::size_t n_factors) const;
};

}  // namespace disent
