#include "disent/cli/run_config.hpp"

#include <fstream>
#include <functional>
#include <map>

#include "disent/errors.hpp"

namespace disent {

using json = nlohmann::json;

namespace {

template <class T>
T get_as(const json& v, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(key, "expected a string");
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError(key, "expected a number");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
      if (v.is_number_integer() && !v.is_number_unsigned()) throw ConfigError(key, "must be non-negative");
    }
    return v.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(key, e.what());
  }
}

std::vector<std::string> string_list(const json& v, const std::string& key) {
  if (!v.is_array()) throw ConfigError(key, "expected an array of paths");
  std::vector<std::string> out;
  for (const auto& item : v) out.push_back(get_as<std::string>(item, key));
  return out;
}

}  // namespace

void RunConfig::set_seed(std::uint64_t s) {
  seed = s;
  train.seed = s;
}

EvalOptions RunConfig::eval_options() const {
  EvalOptions o;
  o.probe.epochs = probe_epochs;
  o.swap_pairs = swap_pairs;
  return o;
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["n_samples"] = n_samples;
  j["mask_policy"] = mask_policy.to_string();
  j["lambda"] = train.lambda.empty() ? train.lambdas(canonical_factors().size()) : train.lambda;
  j["gamma"] = train.gamma;
  j["lr_ae"] = train.lr_ae;
  j["lr_pred"] = train.lr_pred;
  j["momentum"] = train.momentum;
  j["predictor_steps"] = train.predictor_steps;
  j["batch_size"] = train.batch_size;
  j["total_rounds"] = train.total_rounds;
  j["adversarial_cap"] = train.adversarial_cap;
  j["probe_epochs"] = probe_epochs;
  j["swap_pairs"] = swap_pairs;
  j["dataset_out"] = dataset_out;
  j["train_data"] = train_data;
  j["model_out"] = model_out;
  j["history_out"] = history_out;
  j["eval_train"] = eval_train;
  j["eval_test"] = eval_test;
  j["report_out"] = report_out;
  return j;
}

RunConfig parse_run_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  RunConfig c;
  const std::map<std::string, std::function<void(const json&, const std::string&)>> fields = {
      {"seed", [&](const json& v, const std::string& k) { c.set_seed(get_as<std::uint64_t>(v, k)); }},
      {"n_samples", [&](const json& v, const std::string& k) { c.n_samples = get_as<std::size_t>(v, k); }},
      {"mask_policy",
       [&](const json& v, const std::string& k) {
         try {
           c.mask_policy = MaskPolicy::parse(get_as<std::string>(v, k));
         } catch (const ArgumentError& e) {
           throw ConfigError(k, e.what());
         }
       }},
      {"lambda",
       [&](const json& v, const std::string& k) {
         if (!v.is_array()) throw ConfigError(k, "expected an array of numbers");
         c.train.lambda.clear();
         for (const auto& x : v) c.train.lambda.push_back(get_as<double>(x, k));
       }},
      {"gamma", [&](const json& v, const std::string& k) { c.train.gamma = get_as<double>(v, k); }},
      {"lr_ae", [&](const json& v, const std::string& k) { c.train.lr_ae = get_as<double>(v, k); }},
      {"lr_pred", [&](const json& v, const std::string& k) { c.train.lr_pred = get_as<double>(v, k); }},
      {"momentum", [&](const json& v, const std::string& k) { c.train.momentum = get_as<double>(v, k); }},
      {"predictor_steps",
       [&](const json& v, const std::string& k) { c.train.predictor_steps = get_as<std::size_t>(v, k); }},
      {"batch_size", [&](const json& v, const std::string& k) { c.train.batch_size = get_as<std::size_t>(v, k); }},
      {"total_rounds",
       [&](const json& v, const std::string& k) { c.train.total_rounds = get_as<std::size_t>(v, k); }},
      {"adversarial_cap",
       [&](const json& v, const std::string& k) { c.train.adversarial_cap = get_as<double>(v, k); }},
      {"probe_epochs", [&](const json& v, const std::string& k) { c.probe_epochs = get_as<std::size_t>(v, k); }},
      {"swap_pairs", [&](const json& v, const std::string& k) { c.swap_pairs = get_as<std::size_t>(v, k); }},
      {"dataset_out", [&](const json& v, const std::string& k) { c.dataset_out = get_as<std::string>(v, k); }},
      {"train_data", [&](const json& v, const std::string& k) { c.train_data = string_list(v, k); }},
      {"model_out", [&](const json& v, const std::string& k) { c.model_out = get_as<std::string>(v, k); }},
      {"history_out", [&](const json& v, const std::string& k) { c.history_out = get_as<std::string>(v, k); }},
      {"eval_train", [&](const json& v, const std::string& k) { c.eval_train = get_as<std::string>(v, k); }},
      {"eval_test", [&](const json& v, const std::string& k) { c.eval_test = get_as<std::string>(v, k); }},
      {"report_out", [&](const json& v, const std::string& k) { c.report_out = get_as<std::string>(v, k); }},
  };
  for (const auto& [key, value] : doc.items()) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw ConfigError(key, "unknown key");
    it->second(value, key);
  }
  // Training-range checks, reported against the config key.
  try {
    c.train.validate(canonical_factors().size());
  } catch (const ArgumentError& e) {
    const std::string what = e.what();
    throw ConfigError(what.substr(0, what.find(':')), what);
  }
  if (c.n_samples == 0) throw ConfigError("n_samples", "must be positive");
  if (c.probe_epochs == 0) throw ConfigError("probe_epochs", "must be positive");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("<root>", std::string("not valid JSON: ") + e.what());
  }
  return parse_run_config(doc);
}

}  // namespace disent
