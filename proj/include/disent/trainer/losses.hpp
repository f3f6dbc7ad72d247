#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>

namespace disent {

struct TrainConfig;

// Per-step loss decomposition for auto-encoder `factor`.
struct BatchLossBreakdown {
  std::size_t factor = 0;
  bool partial = false;
  double l_rec = 0.0;
  // L_ij: mean cross-entropy of predictor (factor, j) over samples labeled for j.
  std::map<std::size_t, double> l_adv;
  // Mean max_k P_j(k | z) over samples whose label for j is hidden.
  std::map<std::size_t, double> certainty_by_target;
  // gamma * mean certainty over every hidden (sample, j) pair; empty when no
  // label was hidden.
  std::optional<double> certainty;
  double l_i = 0.0;
  // Target whose (capped) weighted loss was the minimum; empty when no target
  // was labeled anywhere in the batch.
  std::optional<std::size_t> argmin;

  // With a single adversary (two factors) this is the classifier loss L_c.
  double l_c() const;
};

struct ComposedLoss {
  double l_i = 0.0;
  std::optional<std::size_t> argmin;
};

// L_i = L_rec - min_j min(lambda_j * L_ij, cap); lambda sits inside the min.
// Ties resolve to the lowest factor index. `lambda` is indexed by factor id.
// Throws ArgumentError when `losses` is empty.
ComposedLoss compose_ae_loss_supervised(double l_rec, const std::map<std::size_t, double>& losses,
                                        std::span<const double> lambda,
                                        double cap = std::numeric_limits<double>::infinity());

// As above plus the certainty penalty; the min term is dropped when `losses`
// is empty.
ComposedLoss compose_ae_loss(double l_rec, std::optional<double> certainty_term,
                             const std::map<std::size_t, double>& losses, std::span<const double> lambda,
                             double cap = std::numeric_limits<double>::infinity());

// Recomputes l_i from the recorded parts.
double recompose(const BatchLossBreakdown& parts, const TrainConfig& config, std::size_t n_factors);

}  // namespace disent
