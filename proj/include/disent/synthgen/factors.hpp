#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace disent {

struct FactorSpec {
  std::size_t id = 0;
  std::string name;
  std::size_t cardinality = 2;

  friend bool operator==(const FactorSpec&, const FactorSpec&) = default;
};

using FactorList = std::vector<FactorSpec>;

// Class index per factor id.
using FactorAssignment = std::vector<std::size_t>;
// Per factor: is the label visible to training?
using AnnotationMask = std::vector<bool>;

// Ids consecutive from 0, cardinalities >= 2, names non-empty.
void validate_factors(std::span<const FactorSpec> factors);
void validate_assignment(std::span<const FactorSpec> factors, const FactorAssignment& a);

// pitch (4) / envelope (3) / timbre (3).
FactorList canonical_factors();

namespace factor {
inline constexpr std::size_t pitch = 0;
inline constexpr std::size_t envelope = 1;
inline constexpr std::size_t timbre = 2;
}  // namespace factor

namespace envelope_class {
inline constexpr std::size_t rising = 0;
inline constexpr std::size_t flat = 1;
inline constexpr std::size_t falling = 2;
}  // namespace envelope_class

namespace timbre_class {
inline constexpr std::size_t bright = 0;
inline constexpr std::size_t neutral = 1;
inline constexpr std::size_t dark = 2;
}  // namespace timbre_class

// "full" or "only(f)".
struct MaskPolicy {
  enum class Kind { full, only };
  Kind kind = Kind::full;
  std::size_t factor = 0;

  static MaskPolicy full() { return {}; }
  static MaskPolicy only(std::size_t f) { return {Kind::only, f}; }
  static MaskPolicy parse(const std::string& text);  // throws ArgumentError
  std::string to_string() const;
  AnnotationMask mask_for(std::size_t n_factors) const;

  friend bool operator==(const MaskPolicy&, const MaskPolicy&) = default;
};

}  // namespace disent
