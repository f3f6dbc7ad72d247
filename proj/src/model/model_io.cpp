#include "disent/model/model_io.hpp"

#include <fstream>
#include <iterator>
#include <set>

#include "disent/errors.hpp"
#include "json.hpp"

namespace disent {

using json = nlohmann::ordered_json;

namespace {

json matrix_to_json(const Matrix& m) {
  if (m.rows() == 1) return json(std::vector<double>(m.values().begin(), m.values().end()));
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r)
    rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  return rows;
}

void json_to_matrix(const json& j, Matrix& m, const std::string& name) {
  const auto bad = [&] { return FormatError("model: parameter '" + name + "' has the wrong shape"); };
  if (m.rows() == 1) {
    if (!j.is_array() || j.size() != m.cols()) throw bad();
    for (std::size_t c = 0; c < m.cols(); ++c) m(0, c) = j[c].get<double>();
    return;
  }
  if (!j.is_array() || j.size() != m.rows()) throw bad();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (!j[r].is_array() || j[r].size() != m.cols()) throw bad();
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = j[r][c].get<double>();
  }
}

std::size_t rows_of(const json& params, const std::string& name) {
  if (!params.contains(name)) throw FormatError("model: missing parameter '" + name + "'");
  return params.at(name).size();
}

std::size_t cols_of(const json& params, const std::string& name) {
  const json& j = params.at(name);
  if (j.empty() || !j[0].is_array()) throw FormatError("model: parameter '" + name + "' is not a matrix");
  return j[0].size();
}

}  // namespace

void write_model(std::ostream& out, const DisentangleModel& model) {
  json doc;
  doc["version"] = kModelFormatVersion;
  json factors = json::array();
  for (const auto& f : model.factors()) factors.push_back({{"name", f.name}, {"cardinality", f.cardinality}});
  doc["factors"] = std::move(factors);
  doc["seed"] = model.seed();
  json params = json::object();
  for (const auto& [name, store] : model.stores())
    for (const auto& slot : store->slots()) params[slot.name] = matrix_to_json(slot.value);
  doc["params"] = std::move(params);
  out << doc.dump() << '\n';
  if (!out) throw IoError("failed writing model");
}

void save_model(const std::filesystem::path& path, const DisentangleModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_model(out, model);
}

DisentangleModel read_model(std::istream& in) {
  try {
    const json doc = json::parse(std::string(std::istreambuf_iterator<char>(in), {}));
    if (!doc.contains("version") || doc.at("version") != kModelFormatVersion)
      throw FormatError("model: unsupported or missing version");
    FactorList factors;
    std::size_t id = 0;
    for (const auto& f : doc.at("factors"))
      factors.push_back({id++, f.at("name").get<std::string>(), f.at("cardinality").get<std::size_t>()});
    const json& params = doc.at("params");

    ModelShape shape;
    shape.ae_hidden = rows_of(params, "ae0.enc.W1");
    shape.input_dim = cols_of(params, "ae0.enc.W1");
    shape.latent_dim = rows_of(params, "ae0.enc.W2");
    shape.predictor_hidden = rows_of(params, predictor_name(0, 1) + ".W1");

    DisentangleModel model = DisentangleModel::init(std::move(factors), doc.at("seed").get<std::uint64_t>(), shape);
    std::set<std::string> seen;
    for (auto& [name, store] : model.stores())
      for (auto& slot : store->slots()) {
        if (!params.contains(slot.name)) throw FormatError("model: missing parameter '" + slot.name + "'");
        json_to_matrix(params.at(slot.name), slot.value, slot.name);
        seen.insert(slot.name);
      }
    for (const auto& item : params.items())
      if (!seen.count(item.key())) throw FormatError("model: unexpected parameter '" + item.key() + "'");
    return model;
  } catch (const json::exception& e) {
    throw FormatError(std::string("model: ") + e.what());
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("model: ") + e.what());
  }
}

DisentangleModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_model(in);
}

}  // namespace disent
