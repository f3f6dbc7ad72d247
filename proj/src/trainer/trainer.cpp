#include "disent/trainer/trainer.hpp"

#include <chrono>
#include <string>

#include "disent/errors.hpp"
#include "disent/numerics/param_store.hpp"

namespace disent {

std::map<std::size_t, double> predictor_update(DisentangleModel& model, std::size_t i, const Batch& batch,
                                               const TrainConfig& config) {
  if (batch.rows() == 0) throw ArgumentError("predictor_update: empty batch");
  const Matrix z = model.encode(i, batch.features);
  std::map<std::size_t, double> losses;
  for (std::size_t j = 0; j < model.factor_count(); ++j) {
    if (j == i) continue;
    const auto rows = batch.visible_rows(j);
    if (rows.empty()) continue;
    const auto classes = batch.visible_labels(j);
    Predictor& pred = model.predictor(i, j);
    Tape tape;
    const auto probs = pred.probabilities(tape, tape.input(z), true);
    const auto loss = tape.cross_entropy(probs, rows, classes);
    losses[j] = tape.scalar(loss);
    tape.backward(loss);
    sgd_step(pred.net.params(), config.lr_pred, config.momentum);
  }
  return losses;
}

AeObjective build_ae_objective(Tape& tape, DisentangleModel& model, std::size_t i, const Batch& batch,
                               const TrainConfig& config, bool trainable, const Matrix* fixed_labels) {
  if (batch.rows() == 0) throw ArgumentError("auto-encoder update: empty batch");
  const std::size_t n = model.factor_count();
  if (batch.factor_count() != n) throw DataError("batch factor count does not match the model");
  const auto lambda = config.lambdas(n);
  FactorAutoEncoder& ae = model.autoencoder(i);

  AeObjective obj;
  obj.parts.factor = i;
  obj.parts.partial = !batch.fully_labeled();

  const auto x = tape.input(batch.features);
  const auto z = ae.encoder.forward(tape, x, trainable);

  Matrix label_block(batch.rows(), model.label_width(i));
  std::map<std::size_t, Tape::Var> adversarial;
  std::vector<std::pair<Tape::Var, std::size_t>> certainty_terms;
  std::size_t hidden_pairs = 0;
  std::size_t col = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    const auto probs = model.predictor(i, j).probabilities(tape, z, false);
    const auto visible = batch.visible_rows(j);
    const auto hidden = batch.hidden_rows(j);
    if (!visible.empty()) {
      const auto l = tape.cross_entropy(probs, visible, batch.visible_labels(j));
      adversarial.emplace(j, l);
      obj.parts.l_adv[j] = tape.scalar(l);
    }
    if (!hidden.empty()) {
      const auto c = tape.max_prob(probs, hidden);
      certainty_terms.emplace_back(c, hidden.size());
      obj.parts.certainty_by_target[j] = tape.scalar(c);
      hidden_pairs += hidden.size();
    }
    const Matrix& p = tape.value(probs);
    for (std::size_t r = 0; r < batch.rows(); ++r) {
      if (batch.visible(j, r)) {
        label_block(r, col + batch.labels[j][r]) = 1.0;
      } else {
        for (std::size_t k = 0; k < p.cols(); ++k) label_block(r, col + k) = p(r, k);
      }
    }
    col += model.factors()[j].cardinality;
  }

  if (fixed_labels) {
    require_shape(*fixed_labels, label_block.rows(), label_block.cols(), "fixed decoder labels");
    label_block = *fixed_labels;
  }
  obj.decoder_labels = label_block;
  const auto decoder_in = tape.concat_cols(z, tape.constant(std::move(label_block)));
  const auto x_hat = ae.decoder.forward(tape, decoder_in, trainable);
  const auto l_rec = tape.l1(x_hat, x);
  obj.parts.l_rec = tape.scalar(l_rec);

  auto loss = l_rec;
  if (hidden_pairs > 0) {
    std::optional<Tape::Var> mean;
    for (const auto& [c, count] : certainty_terms) {
      const auto w = tape.scale(c, static_cast<double>(count) / static_cast<double>(hidden_pairs));
      mean = mean ? tape.add(*mean, w) : w;
    }
    const auto penalty = tape.scale(*mean, config.gamma);
    obj.parts.certainty = tape.scalar(penalty);
    loss = tape.add(loss, penalty);
  }

  const ComposedLoss composed =
      compose_ae_loss(obj.parts.l_rec, obj.parts.certainty, obj.parts.l_adv, lambda, config.adversarial_cap);
  obj.parts.argmin = composed.argmin;
  if (composed.argmin) {
    const std::size_t j = *composed.argmin;
    const auto term = tape.clip_max(tape.scale(adversarial.at(j), lambda[j]), config.adversarial_cap);
    loss = tape.sub(loss, term);
  }
  obj.parts.l_i = tape.scalar(loss);
  obj.loss = loss;
  return obj;
}

namespace {

BatchLossBreakdown ae_step(DisentangleModel& model, std::size_t i, const Batch& batch, const TrainConfig& config) {
  Tape tape;
  AeObjective obj = build_ae_objective(tape, model, i, batch, config, true);
  tape.backward(obj.loss);
  FactorAutoEncoder& ae = model.autoencoder(i);
  sgd_step(ae.encoder.params(), config.lr_ae, config.momentum);
  sgd_step(ae.decoder.params(), config.lr_ae, config.momentum);
  return obj.parts;
}

void check_datasets(const DisentangleModel& model, std::span<const Dataset> datasets) {
  if (datasets.empty()) throw DataError("train_loop: no datasets");
  for (const auto& d : datasets) {
    if (d.empty()) throw DataError("train_loop: empty dataset '" + d.provenance + "'");
    if (d.factors != model.factors()) throw DataError("train_loop: dataset factor spec differs from the model's");
  }
}

}  // namespace

BatchLossBreakdown ae_update_supervised(DisentangleModel& model, std::size_t i, const Batch& batch,
                                        const TrainConfig& config) {
  if (!batch.fully_labeled())
    throw ArgumentError("ae_update_supervised: batch has hidden labels; use ae_update_partial");
  return ae_step(model, i, batch, config);
}

BatchLossBreakdown ae_update_partial(DisentangleModel& model, std::size_t i, const Batch& batch,
                                     const TrainConfig& config) {
  return ae_step(model, i, batch, config);
}

TrainHistory train_loop(DisentangleModel& model, std::span<const Dataset> datasets, const TrainConfig& config,
                        const TrainHooks& hooks) {
  check_datasets(model, datasets);
  const std::size_t n = model.factor_count();
  config.validate(n);

  const Rng root = Rng(config.seed).split("train");
  std::vector<BatchStream> predictor_streams, ae_streams;
  for (std::size_t i = 0; i < n; ++i) {
    predictor_streams.emplace_back(datasets, config.batch_size, root.split("pred" + std::to_string(i)));
    ae_streams.emplace_back(datasets, config.batch_size, root.split("ae" + std::to_string(i)));
  }

  const auto notify = [](const std::function<void(const UpdateEvent&)>& f, const UpdateEvent& e) {
    if (f) f(e);
  };

  TrainHistory history;
  history.rounds.reserve(config.total_rounds);
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t round = 0; round < config.total_rounds; ++round) {
    RoundRecord rec;
    rec.round = round;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < config.predictor_steps; ++k) {
        const Batch batch = predictor_streams[i].next();
        const UpdateEvent ev{UpdateKind::predictor, round, i, model};
        notify(hooks.before_update, ev);
        predictor_update(model, i, batch, config);
        notify(hooks.after_update, ev);
      }
      const Batch batch = ae_streams[i].next();
      const UpdateEvent ev{UpdateKind::autoencoder, round, i, model};
      notify(hooks.before_update, ev);
      rec.factors.push_back(batch.fully_labeled() ? ae_update_supervised(model, i, batch, config)
                                                  : ae_update_partial(model, i, batch, config));
      notify(hooks.after_update, ev);
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    history.rounds.push_back(std::move(rec));
  }
  return history;
}

}  // namespace disent
