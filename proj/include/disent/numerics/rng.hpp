#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace disent {

// Counter-based generator: the i-th output is a SplitMix64 finalizer applied to
// key + (i + 1) * golden_gamma. Streams derived with split() use a hashed key
// and are independent of how many values the parent has produced.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next_u64() noexcept;
  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept;
  // Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n) noexcept;

  Rng split(std::uint64_t stream) const noexcept;
  Rng split(std::string_view name) const noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  Rng(std::uint64_t key, std::uint64_t counter) noexcept : key_(key), counter_(counter) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace disent
