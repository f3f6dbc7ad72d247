#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "disent/numerics/matrix.hpp"

namespace disent {

class Rng;

struct ParamSlot {
  std::string name;
  Matrix value;
  Matrix grad;      // same shape as value; written by Tape::backward
  Matrix velocity;  // same shape as value; momentum buffer for sgd_step
};

// Ordered collection of uniquely named parameter slots. Slots are addressed by
// the index returned from add(); the store never reorders them.
class ParamStore {
 public:
  std::size_t add(std::string name, std::size_t rows, std::size_t cols);

  std::size_t size() const noexcept { return slots_.size(); }
  ParamSlot& operator[](std::size_t i) { return slots_[i]; }
  const ParamSlot& operator[](std::size_t i) const { return slots_[i]; }
  ParamSlot& at(std::string_view name);
  const ParamSlot& at(std::string_view name) const;
  const ParamSlot* find(std::string_view name) const noexcept;

  std::span<ParamSlot> slots() noexcept { return slots_; }
  std::span<const ParamSlot> slots() const noexcept { return slots_; }

  void zero_grad();
  void zero_velocity();
  std::size_t parameter_count() const noexcept;
  // Bitwise comparison of weights only.
  bool weights_bit_equal(const ParamStore& other) const noexcept;

 private:
  std::vector<ParamSlot> slots_;
};

// He-style initialisation: weights uniform on [-a, a] with a = sqrt(3) * sqrt(2 / fan_in)
// (unit-variance uniform scaled by sqrt(2 / fan_in)); biases zero.
void he_init_weight(Matrix& w, std::size_t fan_in, Rng& rng);

// v <- momentum * v + grad ; w <- w - lr * v, for every slot.
void sgd_step(ParamStore& params, double lr, double momentum);

}  // namespace disent
