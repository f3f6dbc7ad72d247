#include "disent/model/model.hpp"

#include <cmath>

#include "disent/errors.hpp"
#include "disent/numerics/ops.hpp"
#include "disent/numerics/rng.hpp"

namespace disent {

std::string encoder_name(std::size_t i) { return "ae" + std::to_string(i) + ".enc"; }
std::string decoder_name(std::size_t i) { return "ae" + std::to_string(i) + ".dec"; }
std::string predictor_name(std::size_t owner, std::size_t target) {
  return "ae" + std::to_string(owner) + ".pred" + std::to_string(target);
}

TwoLayerNet::TwoLayerNet(const std::string& prefix, std::size_t in, std::size_t hidden, std::size_t out)
    : in_(in), hidden_(hidden), out_(out) {
  params_.add(prefix + ".W1", hidden, in);
  params_.add(prefix + ".b1", 1, hidden);
  params_.add(prefix + ".W2", out, hidden);
  params_.add(prefix + ".b2", 1, out);
}

void TwoLayerNet::he_init(Rng& rng) {
  he_init_weight(params_[W1].value, in_, rng);
  he_init_weight(params_[W2].value, hidden_, rng);
  params_[b1].value.fill(0.0);
  params_[b2].value.fill(0.0);
}

Matrix TwoLayerNet::forward(const Matrix& x) const {
  Matrix h = dense_forward(x, params_[W1].value, params_[b1].value, params_[W1].name, params_[b1].name);
  leaky_relu_inplace(h);
  return dense_forward(h, params_[W2].value, params_[b2].value, params_[W2].name, params_[b2].name);
}

Tape::Var TwoLayerNet::forward(Tape& tape, Tape::Var x, bool trainable) {
  const auto slot = [&](Slot s) { return trainable ? tape.param(params_[s]) : tape.frozen(params_[s]); };
  const auto h = tape.leaky_relu(tape.dense(x, slot(W1), slot(b1)));
  return tape.dense(h, slot(W2), slot(b2));
}

Matrix Predictor::probabilities(const Matrix& z) const {
  Matrix p = net.forward(z);
  softmax_rows_inplace(p);
  return p;
}

Tape::Var Predictor::probabilities(Tape& tape, Tape::Var z, bool trainable) {
  return tape.softmax(net.forward(tape, z, trainable));
}

DisentangleModel DisentangleModel::init(FactorList factors, std::uint64_t seed, ModelShape shape) {
  validate_factors(factors);
  if (factors.size() < 2) throw ArgumentError("DisentangleModel needs at least two factors");
  DisentangleModel m;
  m.factors_ = std::move(factors);
  m.seed_ = seed;
  m.shape_ = shape;
  const Rng root = Rng(seed).split("model");
  const std::size_t n = m.factors_.size();
  for (std::size_t i = 0; i < n; ++i) {
    FactorAutoEncoder ae;
    ae.factor = i;
    ae.encoder = TwoLayerNet(encoder_name(i), shape.input_dim, shape.ae_hidden, shape.latent_dim);
    ae.decoder = TwoLayerNet(decoder_name(i), shape.latent_dim + m.label_width(i), shape.ae_hidden,
                             shape.input_dim);
    Rng enc_rng = root.split(encoder_name(i));
    Rng dec_rng = root.split(decoder_name(i));
    ae.encoder.he_init(enc_rng);
    ae.decoder.he_init(dec_rng);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      Predictor p{i, j,
                  TwoLayerNet(predictor_name(i, j), shape.latent_dim, shape.predictor_hidden,
                              m.factors_[j].cardinality)};
      Rng pred_rng = root.split(predictor_name(i, j));
      p.net.he_init(pred_rng);
      ae.predictors.push_back(std::move(p));
    }
    m.autoencoders_.push_back(std::move(ae));
  }
  return m;
}

void DisentangleModel::check_factor(std::size_t i) const {
  if (i >= factors_.size())
    throw ArgumentError("factor index " + std::to_string(i) + " out of range (n=" +
                        std::to_string(factors_.size()) + ")");
}

FactorAutoEncoder& DisentangleModel::autoencoder(std::size_t i) {
  check_factor(i);
  return autoencoders_[i];
}

const FactorAutoEncoder& DisentangleModel::autoencoder(std::size_t i) const {
  check_factor(i);
  return autoencoders_[i];
}

const Predictor& DisentangleModel::predictor(std::size_t owner, std::size_t target) const {
  check_factor(owner);
  check_factor(target);
  if (owner == target)
    throw ArgumentError("auto-encoder " + std::to_string(owner) + " has no predictor for its own factor");
  return autoencoders_[owner].predictors[target < owner ? target : target - 1];
}

Predictor& DisentangleModel::predictor(std::size_t owner, std::size_t target) {
  return const_cast<Predictor&>(std::as_const(*this).predictor(owner, target));
}

std::size_t DisentangleModel::predictor_count() const noexcept {
  std::size_t n = 0;
  for (const auto& ae : autoencoders_) n += ae.predictors.size();
  return n;
}

std::size_t DisentangleModel::label_width(std::size_t i) const {
  check_factor(i);
  std::size_t w = 0;
  for (const auto& f : factors_)
    if (f.id != i) w += f.cardinality;
  return w;
}

Matrix DisentangleModel::encode(std::size_t i, const Matrix& x) const {
  return autoencoder(i).encoder.forward(x);
}

Matrix DisentangleModel::predict(std::size_t i, std::size_t j, const Matrix& z) const {
  return predictor(i, j).probabilities(z);
}

void DisentangleModel::validate_label_inputs(std::size_t i, const Matrix& label_inputs) const {
  if (label_inputs.cols() != label_width(i))
    throw ArgumentError("decoder " + std::to_string(i) + " expects " + std::to_string(label_width(i)) +
                        " label columns, got " + std::to_string(label_inputs.cols()));
  for (std::size_t r = 0; r < label_inputs.rows(); ++r) {
    std::size_t col = 0;
    for (const auto& f : factors_) {
      if (f.id == i) continue;
      double sum = 0.0;
      for (std::size_t k = 0; k < f.cardinality; ++k) {
        const double p = label_inputs(r, col + k);
        if (!(p >= 0.0) || !std::isfinite(p))
          throw ArgumentError("label input for factor '" + f.name + "' has a negative or non-finite entry");
        sum += p;
      }
      if (std::fabs(sum - 1.0) > 1e-6)
        throw ArgumentError("label input for factor '" + f.name + "' does not sum to 1");
      col += f.cardinality;
    }
  }
}

Matrix DisentangleModel::decode(std::size_t i, const Matrix& z, const Matrix& label_inputs) const {
  require_shape(z, z.rows(), shape_.latent_dim, "decode latent");
  require_shape(label_inputs, z.rows(), label_inputs.cols(), "decode label inputs");
  validate_label_inputs(i, label_inputs);
  Matrix in(z.rows(), decoder_input_width(i));
  for (std::size_t r = 0; r < z.rows(); ++r) {
    auto row = in.row(r);
    std::copy(z.row(r).begin(), z.row(r).end(), row.begin());
    std::copy(label_inputs.row(r).begin(), label_inputs.row(r).end(),
              row.begin() + static_cast<std::ptrdiff_t>(shape_.latent_dim));
  }
  return autoencoder(i).decoder.forward(in);
}

Vector DisentangleModel::encode(std::size_t i, std::span<const double> x) const {
  const Matrix z = encode(i, Matrix::row_vector(x));
  return {z.values().begin(), z.values().end()};
}

Vector DisentangleModel::predict(std::size_t i, std::size_t j, std::span<const double> z) const {
  const Matrix p = predict(i, j, Matrix::row_vector(z));
  return {p.values().begin(), p.values().end()};
}

Vector DisentangleModel::decode(std::size_t i, std::span<const double> z,
                                const std::vector<Vector>& label_inputs) const {
  check_factor(i);
  if (label_inputs.size() != factors_.size() - 1)
    throw ArgumentError("decode expects one label vector per factor other than " + std::to_string(i));
  Vector flat;
  std::size_t k = 0;
  for (const auto& f : factors_) {
    if (f.id == i) continue;
    if (label_inputs[k].size() != f.cardinality)
      throw ArgumentError("label input for factor '" + f.name + "' has the wrong length");
    flat.insert(flat.end(), label_inputs[k].begin(), label_inputs[k].end());
    ++k;
  }
  const Matrix out = decode(i, Matrix::row_vector(z), Matrix::row_vector(flat));
  return {out.values().begin(), out.values().end()};
}

Matrix DisentangleModel::one_hot_labels(std::size_t i, std::span<const FactorAssignment> labels) const {
  Matrix m(labels.size(), label_width(i));
  for (std::size_t r = 0; r < labels.size(); ++r) {
    validate_assignment(factors_, labels[r]);
    std::size_t col = 0;
    for (const auto& f : factors_) {
      if (f.id == i) continue;
      m(r, col + labels[r][f.id]) = 1.0;
      col += f.cardinality;
    }
  }
  return m;
}

std::vector<std::pair<std::string, const ParamStore*>> DisentangleModel::stores() const {
  std::vector<std::pair<std::string, const ParamStore*>> out;
  for (const auto& ae : autoencoders_) {
    out.emplace_back(encoder_name(ae.factor), &ae.encoder.params());
    out.emplace_back(decoder_name(ae.factor), &ae.decoder.params());
    for (const auto& p : ae.predictors) out.emplace_back(predictor_name(p.owner, p.target), &p.net.params());
  }
  return out;
}

std::vector<std::pair<std::string, ParamStore*>> DisentangleModel::stores() {
  std::vector<std::pair<std::string, ParamStore*>> out;
  for (auto& ae : autoencoders_) {
    out.emplace_back(encoder_name(ae.factor), &ae.encoder.params());
    out.emplace_back(decoder_name(ae.factor), &ae.decoder.params());
    for (auto& p : ae.predictors) out.emplace_back(predictor_name(p.owner, p.target), &p.net.params());
  }
  return out;
}

bool DisentangleModel::bit_equal(const DisentangleModel& other) const {
  if (factors_ != other.factors_ || seed_ != other.seed_ || !(shape_ == other.shape_)) return false;
  const auto a = stores();
  const auto b = other.stores();
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k].first != b[k].first || !a[k].second->weights_bit_equal(*b[k].second)) return false;
  return true;
}

}  // namespace disent
