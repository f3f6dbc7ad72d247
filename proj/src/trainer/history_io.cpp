#include "disent/trainer/history_io.hpp"

#include <fstream>
#include <string>

#include "disent/errors.hpp"
#include "json.hpp"

namespace disent {

using json = nlohmann::ordered_json;

void write_history(std::ostream& out, const TrainHistory& history) {
  for (const auto& round : history.rounds)
    for (const auto& f : round.factors) {
      json rec;
      rec["round"] = round.round;
      rec["factor"] = f.factor;
      rec["l_rec"] = f.l_rec;
      json adv = json::object();
      for (const auto& [j, l] : f.l_adv) adv[std::to_string(j)] = l;
      rec["l_adv"] = std::move(adv);
      rec["certainty"] = f.certainty ? json(*f.certainty) : json(nullptr);
      rec["l_i"] = f.l_i;
      rec["argmin_j"] = f.argmin ? json(*f.argmin) : json(nullptr);
      out << rec.dump() << '\n';
    }
  if (!out) throw IoError("failed writing history");
}

void save_history(const std::filesystem::path& path, const TrainHistory& history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_history(out, history);
}

TrainHistory read_history(std::istream& in) {
  TrainHistory h;
  std::string line;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json rec = json::parse(line);
      BatchLossBreakdown b;
      const std::size_t round = rec.at("round").get<std::size_t>();
      b.factor = rec.at("factor").get<std::size_t>();
      b.l_rec = rec.at("l_rec").get<double>();
      for (const auto& item : rec.at("l_adv").items()) b.l_adv[std::stoul(item.key())] = item.value().get<double>();
      if (!rec.at("certainty").is_null()) b.certainty = rec.at("certainty").get<double>();
      b.l_i = rec.at("l_i").get<double>();
      if (!rec.at("argmin_j").is_null()) b.argmin = rec.at("argmin_j").get<std::size_t>();
      b.partial = b.certainty.has_value();
      if (h.rounds.empty() || h.rounds.back().round != round) h.rounds.push_back(RoundRecord{round, 0.0, {}});
      h.rounds.back().factors.push_back(std::move(b));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("history: ") + e.what());
  }
  return h;
}

}  // namespace disent
