#include "disent/synthgen/factors.hpp"

#include <regex>

#include "disent/errors.hpp"

namespace disent {

void validate_factors(std::span<const FactorSpec> factors) {
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (factors[i].id != i)
      throw ArgumentError("factor ids must be consecutive from 0; got " +
                          std::to_string(factors[i].id) + " at position " + std::to_string(i));
    if (factors[i].cardinality < 2)
      throw ArgumentError("factor '" + factors[i].name + "' needs cardinality >= 2");
    if (factors[i].name.empty()) throw ArgumentError("factor " + std::to_string(i) + " has no name");
  }
}

void validate_assignment(std::span<const FactorSpec> factors, const FactorAssignment& a) {
  if (a.size() != factors.size())
    throw ArgumentError("assignment has " + std::to_string(a.size()) + " entries for " +
                        std::to_string(factors.size()) + " factors");
  for (std::size_t f = 0; f < a.size(); ++f)
    if (a[f] >= factors[f].cardinality)
      throw ArgumentError("class " + std::to_string(a[f]) + " invalid for factor '" +
                          factors[f].name + "'");
}

FactorList canonical_factors() {
  return {{factor::pitch, "pitch", 4}, {factor::envelope, "envelope", 3}, {factor::timbre, "timbre", 3}};
}

MaskPolicy MaskPolicy::parse(const std::string& text) {
  if (text == "full") return full();
  static const std::regex only_re(R"(only\((\d+)\))");
  std::smatch m;
  if (std::regex_match(text, m, only_re)) return only(std::stoul(m[1].str()));
  throw ArgumentError("mask policy must be \"full\" or \"only(<factor>)\", got \"" + text + "\"");
}

std::string MaskPolicy::to_string() const {
  return kind == Kind::full ? "full" : "only(" + std::to_string(factor) + ")";
}

AnnotationMask MaskPolicy::mask_for(std::size_t n_factors) const {
  if (kind == Kind::full) return AnnotationMask(n_factors, true);
  if (factor >= n_factors) throw ArgumentError("mask policy " + to_string() + " names a missing factor");
  AnnotationMask m(n_factors, false);
  m[factor] = true;
  return m;
}

}  // namespace disent
