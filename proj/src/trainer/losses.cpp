#include "disent/trainer/losses.hpp"

#include <algorithm>

#include "disent/errors.hpp"
#include "disent/trainer/config.hpp"

namespace disent {

double BatchLossBreakdown::l_c() const {
  if (l_adv.size() != 1) throw ArgumentError("l_c is defined only for a single adversary");
  return l_adv.begin()->second;
}

ComposedLoss compose_ae_loss(double l_rec, std::optional<double> certainty_term,
                             const std::map<std::size_t, double>& losses, std::span<const double> lambda,
                             double cap) {
  ComposedLoss out;
  out.l_i = l_rec + certainty_term.value_or(0.0);
  double best = 0.0;
  for (const auto& [j, l] : losses) {
    if (j >= lambda.size()) throw ArgumentError("no lambda for factor " + std::to_string(j));
    const double weighted = std::min(lambda[j] * l, cap);
    if (!out.argmin || weighted < best) {  // map order: first seen wins ties
      best = weighted;
      out.argmin = j;
    }
  }
  if (out.argmin) out.l_i -= best;
  return out;
}

ComposedLoss compose_ae_loss_supervised(double l_rec, const std::map<std::size_t, double>& losses,
                                        std::span<const double> lambda, double cap) {
  if (losses.empty()) throw ArgumentError("compose_ae_loss_supervised: no adversarial losses");
  return compose_ae_loss(l_rec, std::nullopt, losses, lambda, cap);
}

double recompose(const BatchLossBreakdown& parts, const TrainConfig& config, std::size_t n_factors) {
  const auto lambda = config.lambdas(n_factors);
  return compose_ae_loss(parts.l_rec, parts.certainty, parts.l_adv, lambda, config.adversarial_cap).l_i;
}

}  // namespace disent
