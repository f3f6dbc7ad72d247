#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "disent/model/model.hpp"
#include "disent/numerics/tape.hpp"
#include "disent/synthgen/dataset.hpp"
#include "disent/trainer/batch.hpp"
#include "disent/trainer/config.hpp"
#include "disent/trainer/losses.hpp"

namespace disent {

// One SGD step on every predictor (i, j), j != i, minimising mean cross-entropy
// on the samples labeled for j. The encoder is evaluated outside the tape, so
// no gradient reaches it. Predictors with no labeled sample are left untouched.
// Returns the pre-step mean loss per updated target.
std::map<std::size_t, double> predictor_update(DisentangleModel& model, std::size_t i, const Batch& batch,
                                               const TrainConfig& config);

// Records auto-encoder i's objective on `tape`:
//   L_i = L_rec + gamma * mean_{hidden (r,j)} max_k P_j(k|z_r) - min_{labeled j} min(lambda_j L_ij, cap)
// Labeled targets feed the decoder as one-hots; hidden ones feed the predictor's
// soft output as a constant. Predictors are always frozen; the encoder and
// decoder enter as trainable parameters when `trainable` is set.
// `fixed_labels`, when given, replaces the decoder's label block (one-hots and
// soft predictions); finite-difference checks use it to hold the detached
// input still.
struct AeObjective {
  Tape::Var loss;
  BatchLossBreakdown parts;
  Matrix decoder_labels;
};
AeObjective build_ae_objective(Tape& tape, DisentangleModel& model, std::size_t i, const Batch& batch,
                               const TrainConfig& config, bool trainable = true,
                               const Matrix* fixed_labels = nullptr);

// Fully labeled batches only; throws ArgumentError otherwise.
BatchLossBreakdown ae_update_supervised(DisentangleModel& model, std::size_t i, const Batch& batch,
                                        const TrainConfig& config);
// Any mask pattern. On a fully labeled batch it matches ae_update_supervised.
BatchLossBreakdown ae_update_partial(DisentangleModel& model, std::size_t i, const Batch& batch,
                                     const TrainConfig& config);

struct RoundRecord {
  std::size_t round = 0;
  double wall_seconds = 0.0;  // in-memory only; never written to files
  std::vector<BatchLossBreakdown> factors;
};

struct TrainHistory {
  std::vector<RoundRecord> rounds;
  std::size_t size() const noexcept { return rounds.size(); }
};

enum class UpdateKind { predictor, autoencoder };

struct UpdateEvent {
  UpdateKind kind;
  std::size_t round;
  std::size_t factor;
  const DisentangleModel& model;
};

// Observation points around every parameter update, for audits.
struct TrainHooks {
  std::function<void(const UpdateEvent&)> before_update;
  std::function<void(const UpdateEvent&)> after_update;
};

// Alternating optimisation. Each round, for every factor i: predictor_steps
// predictor updates, then one auto-encoder update (supervised when the batch
// is fully labeled, partial otherwise). Batches for each factor's predictor
// and auto-encoder steps come from separate round-robin streams over
// `datasets`. Bit-deterministic for a fixed config.seed and kernel variant.
TrainHistory train_loop(DisentangleModel& model, std::span<const Dataset> datasets, const TrainConfig& config,
                        const TrainHooks& hooks = {});

}  // namespace disent
