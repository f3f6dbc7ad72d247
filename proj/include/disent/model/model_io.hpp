#pragma once

#include <filesystem>
#include <iosfwd>

#include "disent/model/model.hpp"

namespace disent {

// {"version":1,"factors":[{"name","cardinality"}...],"seed":int,
//  "params":{"ae0.enc.W1":[[...],...],"ae0.enc.b1":[...],...}}
// Doubles are written in shortest round-trip form, so save/load is bit-exact.
inline constexpr int kModelFormatVersion = 1;

void write_model(std::ostream& out, const DisentangleModel& model);
void save_model(const std::filesystem::path& path, const DisentangleModel& model);
// Throws FormatError on version mismatch, missing/extra slots or bad shapes.
DisentangleModel read_model(std::istream& in);
DisentangleModel load_model(const std::filesystem::path& path);

}  // namespace disent
