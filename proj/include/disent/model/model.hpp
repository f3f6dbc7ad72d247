#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "disent/numerics/matrix.hpp"
#include "disent/numerics/param_store.hpp"
#include "disent/numerics/tape.hpp"
#include "disent/synthgen/factors.hpp"

namespace disent {

class Rng;

struct ModelShape {
  std::size_t input_dim = 128;
  std::size_t latent_dim = 8;
  std::size_t ae_hidden = 64;
  std::size_t predictor_hidden = 32;

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

// dense -> leaky_relu -> dense, parameters in slots "<prefix>.W1", ".b1", ".W2", ".b2".
class TwoLayerNet {
 public:
  enum Slot : std::size_t { W1 = 0, b1 = 1, W2 = 2, b2 = 3 };

  TwoLayerNet() = default;
  TwoLayerNet(const std::string& prefix, std::size_t in, std::size_t hidden, std::size_t out);

  void he_init(Rng& rng);

  std::size_t in_dim() const noexcept { return in_; }
  std::size_t hidden_dim() const noexcept { return hidden_; }
  std::size_t out_dim() const noexcept { return out_; }

  // Rows of x are samples.
  Matrix forward(const Matrix& x) const;
  // With trainable=false the weights enter the tape as constants.
  Tape::Var forward(Tape& tape, Tape::Var x, bool trainable);

  ParamStore& params() noexcept { return params_; }
  const ParamStore& params() const noexcept { return params_; }

 private:
  std::size_t in_ = 0, hidden_ = 0, out_ = 0;
  ParamStore params_;
};

// Adversary owned by auto-encoder `owner`, predicting factor `target` from its latent.
struct Predictor {
  std::size_t owner = 0;
  std::size_t target = 0;
  TwoLayerNet net;

  Matrix probabilities(const Matrix& z) const;
  Tape::Var probabilities(Tape& tape, Tape::Var z, bool trainable);
};

struct FactorAutoEncoder {
  std::size_t factor = 0;
  TwoLayerNet encoder;
  TwoLayerNet decoder;
  std::vector<Predictor> predictors;  // ascending target, owner's own factor skipped
};

// n factor auto-encoders, each with an encoder, a label-conditioned decoder and
// n-1 private predictors. Nothing is shared between auto-encoders.
class DisentangleModel {
 public:
  // Requires n >= 2. Every network is He-initialised from its own stream of
  // Rng(seed).split("model").
  static DisentangleModel init(FactorList factors, std::uint64_t seed, ModelShape shape = {});

  std::size_t factor_count() const noexcept { return factors_.size(); }
  const FactorList& factors() const noexcept { return factors_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const ModelShape& shape() const noexcept { return shape_; }

  FactorAutoEncoder& autoencoder(std::size_t i);
  const FactorAutoEncoder& autoencoder(std::size_t i) const;
  Predictor& predictor(std::size_t owner, std::size_t target);
  const Predictor& predictor(std::size_t owner, std::size_t target) const;
  std::size_t predictor_count() const noexcept;

  // Sum of cardinalities of every factor except i.
  std::size_t label_width(std::size_t i) const;
  std::size_t decoder_input_width(std::size_t i) const { return shape_.latent_dim + label_width(i); }

  // Batched forward passes; rows are samples.
  Matrix encode(std::size_t i, const Matrix& x) const;
  Matrix predict(std::size_t i, std::size_t j, const Matrix& z) const;
  // label_inputs is B x label_width(i): one probability vector per factor j != i,
  // in ascending j. Each block must sum to 1 within 1e-6.
  Matrix decode(std::size_t i, const Matrix& z, const Matrix& label_inputs) const;

  // Single-sample forms.
  Vector encode(std::size_t i, std::span<const double> x) const;
  Vector predict(std::size_t i, std::size_t j, std::span<const double> z) const;
  Vector decode(std::size_t i, std::span<const double> z, const std::vector<Vector>& label_inputs) const;

  // One-hot label block for decoder i; labels[r] is a full assignment.
  Matrix one_hot_labels(std::size_t i, std::span<const FactorAssignment> labels) const;
  void validate_label_inputs(std::size_t i, const Matrix& label_inputs) const;

  // Every ParamStore in a fixed order, with its network name ("ae0.enc", ...).
  std::vector<std::pair<std::string, const ParamStore*>> stores() const;
  std::vector<std::pair<std::string, ParamStore*>> stores();
  bool bit_equal(const DisentangleModel& other) const;

 private:
  void check_factor(std::size_t i) const;

  FactorList factors_;
  std::uint64_t seed_ = 0;
  ModelShape shape_;
  std::vector<FactorAutoEncoder> autoencoders_;
};

std::string encoder_name(std::size_t i);
std::string decoder_name(std::size_t i);
std::string predictor_name(std::size_t owner, std::size_t target);

}  // namespace disent
