#include "disent/trainer/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "disent/errors.hpp"
#include "disent/model/model.hpp"
#include "disent/numerics/rng.hpp"
#include "disent/synthgen/dataset.hpp"
#include "disent/trainer/batch.hpp"
#include "disent/trainer/trainer.hpp"

namespace disent {

namespace {

constexpr std::size_t kBatchRows = 12;
constexpr double kResolvableFraction = 1e-6;
constexpr std::size_t kMaxDrawFactor = 4;

// Records a loss on `tape`, with the given stores entering as trainable.
using LossBuilder = std::function<Tape::Var(Tape&, bool trainable)>;

FamilyCheck check_family(const std::string& family, const std::vector<ParamStore*>& stores,
                         const LossBuilder& build, Rng rng, const GradCheckOptions& opt) {
  Tape analytic;
  analytic.inject_fault(opt.corrupt_backward);
  analytic.backward(build(analytic, true));

  std::vector<ParamSlot*> slots;
  std::size_t total = 0;
  for (ParamStore* ps : stores)
    for (auto& s : ps->slots()) {
      slots.push_back(&s);
      total += s.value.values().size();
    }

  const auto loss_value = [&] {
    Tape t;
    return t.scalar(build(t, false));
  };

  const double base = loss_value();
  // Smallest gradient a central difference at this step can resolve to the
  // tolerance; rounding noise in up - down is a few ulps of the loss.
  const double floor = kResolvableFraction * std::max(1.0, std::fabs(base));

  FamilyCheck out;
  out.family = family;
  out.params_requested = opt.params_per_family;
  const std::size_t max_draws = opt.params_per_family * kMaxDrawFactor;
  for (std::size_t draw = 0; out.params_checked < opt.params_per_family && draw < max_draws; ++draw) {
    std::size_t flat = rng.below(total);
    std::size_t idx = 0;
    while (flat >= slots[idx]->value.values().size()) flat -= slots[idx++]->value.values().size();
    ParamSlot& slot = *slots[idx];
    double& w = slot.value.values()[flat];
    const double a = slot.grad.values()[flat];
    const double saved = w;
    w = saved + opt.step;
    const double up = loss_value();
    w = saved - opt.step;
    const double down = loss_value();
    w = saved;
    const double fwd = (up - base) / opt.step;
    const double bwd = (base - down) / opt.step;
    const double n = 0.5 * (fwd + bwd);
    // One-sided slopes that disagree beyond the tolerance mean a leaky-ReLU
    // or L1 kink lies within one step: not differentiable there, draw again.
    if (std::fabs(fwd - bwd) > opt.tolerance * std::max({std::fabs(fwd), std::fabs(bwd), floor})) {
      ++out.kinks_skipped;
      continue;
    }
    const double err = std::fabs(a - n) / std::max({std::fabs(a), std::fabs(n), floor});
    if (out.params_checked == 0 || err > out.max_rel_error) {
      out.max_rel_error = err;
      out.worst_slot = slot.name;
      out.worst_index = flat;
    }
    ++out.params_checked;
  }
  return out;
}

}  // namespace

double GradCheckReport::max_rel_error() const {
  double m = 0.0;
  for (const auto& f : families) m = std::max(m, f.max_rel_error);
  return m;
}

bool GradCheckReport::passed() const {
  if (families.empty()) return false;
  for (const auto& f : families)
    if (f.params_checked < f.params_requested) return false;
  return max_rel_error() <= tolerance;
}

const FamilyCheck& GradCheckReport::worst() const {
  if (families.empty()) throw ArgumentError("grad check report is empty");
  return *std::max_element(families.begin(), families.end(),
                           [](const auto& a, const auto& b) { return a.max_rel_error < b.max_rel_error; });
}

GradCheckReport run_grad_check(const GradCheckOptions& opt) {
  if (opt.params_per_family == 0) throw ArgumentError("params_per_family must be positive");
  if (!(opt.step > 0.0)) throw ArgumentError("step must be positive");

  const Rng root = Rng(opt.seed).split("grad-check");
  DisentangleModel model = DisentangleModel::init(canonical_factors(), root.split("model").next_u64());

  // Mixed annotation: first half fully labeled, second half hides factor 0.
  Dataset ds = make_dataset(kBatchRows, MaskPolicy::full(), root.split("data").next_u64());
  for (std::size_t r = kBatchRows / 2; r < kBatchRows; ++r) ds.samples[r].mask[0] = false;
  const Batch mixed = make_batch(ds);
  Dataset full_ds = ds;
  for (auto& s : full_ds.samples) s.mask.assign(s.mask.size(), true);
  const Batch full = make_batch(full_ds);

  TrainConfig config;
  const std::size_t i = 1;
  FactorAutoEncoder& ae = model.autoencoder(i);

  // Reconstruction through encoder and decoder with ground-truth one-hots.
  std::vector<FactorAssignment> labels;
  for (const auto& s : ds.samples) labels.push_back(s.labels);
  const Matrix one_hots = model.one_hot_labels(i, labels);
  const auto recon = [&](bool enc_trainable, bool dec_trainable) {
    return [&, enc_trainable, dec_trainable](Tape& t, bool trainable) {
      const auto x = t.input(full.features);
      const auto z = ae.encoder.forward(t, x, trainable && enc_trainable);
      const auto d = t.concat_cols(z, t.input(one_hots));
      return t.l1(ae.decoder.forward(t, d, trainable && dec_trainable), x);
    };
  };

  const Matrix z_pred = model.encode(i, full.features);
  std::vector<std::size_t> rows(kBatchRows);
  for (std::size_t r = 0; r < kBatchRows; ++r) rows[r] = r;
  const auto pred_targets = full.visible_labels(0);
  Predictor& pred = model.predictor(i, 0);
  const LossBuilder predictor_loss = [&](Tape& t, bool trainable) {
    return t.cross_entropy(pred.probabilities(t, t.input(z_pred), trainable), rows, pred_targets);
  };

  // Soft predictions reach the decoder detached, so the numeric pass holds
  // them at their base-point values.
  Matrix base_labels;
  {
    Tape t;
    base_labels = build_ae_objective(t, model, i, mixed, config, false).decoder_labels;
  }
  const LossBuilder composed = [&](Tape& t, bool trainable) {
    return build_ae_objective(t, model, i, mixed, config, trainable, &base_labels).loss;
  };

  GradCheckReport report;
  report.tolerance = opt.tolerance;
  report.families.push_back(
      check_family("encoder", {&ae.encoder.params()}, recon(true, false), root.split("encoder"), opt));
  report.families.push_back(
      check_family("decoder", {&ae.decoder.params()}, recon(false, true), root.split("decoder"), opt));
  report.families.push_back(check_family("predictor", {&pred.net.params()}, predictor_loss, root.split("predictor"), opt));
  report.families.push_back(check_family("composed", {&ae.encoder.params(), &ae.decoder.params()}, composed,
                                         root.split("composed"), opt));
  return report;
}

}  // namespace disent
