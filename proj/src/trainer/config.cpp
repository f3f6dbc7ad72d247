#include "disent/trainer/config.hpp"

#include <cmath>
#include <string>

#include "disent/errors.hpp"

namespace disent {

double TrainConfig::lambda_for(std::size_t factor) const {
  if (lambda.empty()) return kDefaultLambda;
  if (factor >= lambda.size()) throw ArgumentError("no lambda for factor " + std::to_string(factor));
  return lambda[factor];
}

std::vector<double> TrainConfig::lambdas(std::size_t n_factors) const {
  std::vector<double> out(n_factors);
  for (std::size_t j = 0; j < n_factors; ++j) out[j] = lambda_for(j);
  return out;
}

void TrainConfig::validate(std::size_t n_factors) const {
  if (!lambda.empty() && lambda.size() != n_factors)
    throw ArgumentError("lambda: expected " + std::to_string(n_factors) + " entries");
  for (double l : lambda)
    if (!(l >= 0.0) || !std::isfinite(l)) throw ArgumentError("lambda: entries must be finite and >= 0");
  if (!(gamma >= 0.0)) throw ArgumentError("gamma: must be >= 0");
  if (!(lr_ae > 0.0)) throw ArgumentError("lr_ae: must be positive");
  if (!(lr_pred > 0.0)) throw ArgumentError("lr_pred: must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ArgumentError("momentum: must lie in [0, 1)");
  if (predictor_steps < 1) throw ArgumentError("predictor_steps: must be >= 1");
  if (batch_size < 1) throw ArgumentError("batch_size: must be >= 1");
  if (!(adversarial_cap > 0.0)) throw ArgumentError("adversarial_cap: must be positive");
}

}  // namespace disent
