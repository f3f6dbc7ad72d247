#include "disent/numerics/param_store.hpp"

#include <cmath>

#include "disent/errors.hpp"
#include "disent/numerics/kernels.hpp"
#include "disent/numerics/rng.hpp"

namespace disent {

std::size_t ParamStore::add(std::string name, std::size_t rows, std::size_t cols) {
  if (find(name) != nullptr) throw ArgumentError("duplicate parameter slot '" + name + "'");
  slots_.push_back(ParamSlot{std::move(name), Matrix(rows, cols), Matrix(rows, cols),
                             Matrix(rows, cols)});
  return slots_.size() - 1;
}

const ParamSlot* ParamStore::find(std::string_view name) const noexcept {
  for (const auto& s : slots_)
    if (s.name == name) return &s;
  return nullptr;
}

const ParamSlot& ParamStore::at(std::string_view name) const {
  if (const ParamSlot* s = find(name)) return *s;
  throw ArgumentError("no parameter slot '" + std::string(name) + "'");
}

ParamSlot& ParamStore::at(std::string_view name) {
  return const_cast<ParamSlot&>(std::as_const(*this).at(name));
}

void ParamStore::zero_grad() {
  for (auto& s : slots_) s.grad.fill(0.0);
}

void ParamStore::zero_velocity() {
  for (auto& s : slots_) s.velocity.fill(0.0);
}

std::size_t ParamStore::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& s : slots_) n += s.value.size();
  return n;
}

bool ParamStore::weights_bit_equal(const ParamStore& other) const noexcept {
  if (slots_.size() != other.slots_.size()) return false;
  for (std::size_t i = 0; i < slots_.size(); ++i)
    if (slots_[i].name != other.slots_[i].name || !slots_[i].value.bit_equal(other.slots_[i].value))
      return false;
  return true;
}

void he_init_weight(Matrix& w, std::size_t fan_in, Rng& rng) {
  const double limit = std::sqrt(3.0) * std::sqrt(2.0 / static_cast<double>(fan_in));
  for (double& v : w.values()) v = rng.uniform(-limit, limit);
}

void sgd_step(ParamStore& params, double lr, double momentum) {
  const auto& k = kernels::active();
  for (auto& s : params.slots())
    k.momentum_update(s.value.data(), s.velocity.data(), s.grad.data(), s.value.size(), lr,
                      momentum);
}

}  // namespace disent
