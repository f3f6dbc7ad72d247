#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "disent/trainer/trainer.hpp"

namespace disent {

// One NDJSON record per (round, factor):
// {"round":int,"factor":int,"l_rec":real,"l_adv":{"j":real,...},
//  "certainty":real|null,"l_i":real,"argmin_j":int|null}
void write_history(std::ostream& out, const TrainHistory& history);
void save_history(const std::filesystem::path& path, const TrainHistory& history);
// Parsed back as flat per-(round, factor) records grouped by round.
TrainHistory read_history(std::istream& in);

}  // namespace disent
