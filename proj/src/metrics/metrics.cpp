#include "disent/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "disent/errors.hpp"
#include "disent/numerics/ops.hpp"
#include "disent/numerics/param_store.hpp"
#include "disent/numerics/rng.hpp"
#include "disent/numerics/tape.hpp"
#include "disent/synthgen/oracle.hpp"

namespace disent {

using json = nlohmann::ordered_json;

namespace {

void standardize(Matrix& train, Matrix& test) {
  const std::size_t n = train.rows();
  for (std::size_t c = 0; c < train.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += train(r, c);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) var += (train(r, c) - mean) * (train(r, c) - mean);
    var /= static_cast<double>(n);
    const double sd = std::sqrt(var);
    const double inv = sd > 1e-12 ? 1.0 / sd : 1.0;
    for (std::size_t r = 0; r < n; ++r) train(r, c) = (train(r, c) - mean) * inv;
    for (std::size_t r = 0; r < test.rows(); ++r) test(r, c) = (test(r, c) - mean) * inv;
  }
}

Matrix features_of(const Dataset& ds) {
  Matrix x(ds.size(), kFeatureDim);
  for (std::size_t r = 0; r < ds.size(); ++r)
    std::copy(ds.samples[r].features.values.begin(), ds.samples[r].features.values.end(), x.row(r).begin());
  return x;
}

std::vector<std::size_t> labels_of(const Dataset& ds, std::size_t factor) {
  std::vector<std::size_t> y(ds.size());
  for (std::size_t r = 0; r < ds.size(); ++r) y[r] = ds.samples[r].labels[factor];
  return y;
}

void require_labeled_split(const Dataset& ds, const FactorList& factors, const char* what) {
  if (ds.empty()) throw DataError(std::string(what) + " split is empty");
  if (ds.factors != factors) throw DataError(std::string(what) + " split factors differ from the model's");
}

}  // namespace

double probe_accuracy(const Matrix& train_x, std::span<const std::size_t> train_y, const Matrix& test_x,
                      std::span<const std::size_t> test_y, std::size_t classes, std::uint64_t seed,
                      const ProbeConfig& config) {
  if (train_x.rows() == 0 || test_x.rows() == 0) throw DataError("probe: empty split");
  if (train_x.rows() != train_y.size() || test_x.rows() != test_y.size())
    throw DimensionError("probe: label count does not match rows");
  if (train_x.cols() != test_x.cols()) throw DimensionError("probe: train/test widths differ");
  if (config.batch_size == 0) throw ArgumentError("probe: batch_size must be positive");

  Matrix xtr = train_x, xte = test_x;
  if (config.standardize) standardize(xtr, xte);

  Rng rng(seed);
  Rng init = rng.split("init");
  Rng order_rng = rng.split("order");
  TwoLayerNet probe("probe", xtr.cols(), config.hidden, classes);
  probe.he_init(init);

  std::vector<std::size_t> order(xtr.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::size_t> all_rows(config.batch_size), batch_y(config.batch_size);
  std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});
  Matrix xb;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[order_rng.below(k)]);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, order.size() - start);
      if (xb.rows() != len) xb = Matrix(len, xtr.cols());
      batch_y.resize(len);
      for (std::size_t r = 0; r < len; ++r) {
        const auto src = xtr.row(order[start + r]);
        std::copy(src.begin(), src.end(), xb.row(r).begin());
        batch_y[r] = train_y[order[start + r]];
      }
      Tape tape;
      const auto probs = tape.softmax(probe.forward(tape, tape.input(xb), true));
      const auto loss = tape.cross_entropy(probs, std::span(all_rows).first(len), batch_y);
      tape.backward(loss);
      sgd_step(probe.params(), config.lr, config.momentum);
    }
  }

  const Matrix logits = probe.forward(xte);
  std::size_t correct = 0;
  for (std::size_t r = 0; r < logits.rows(); ++r)
    if (argmax(logits.row(r)) == test_y[r]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(logits.rows());
}

ProbeMatrix probe_matrix(const DisentangleModel& model, const Dataset& train, const Dataset& test,
                         std::uint64_t seed, const ProbeConfig& config) {
  require_labeled_split(train, model.factors(), "train");
  require_labeled_split(test, model.factors(), "test");
  const std::size_t n = model.factor_count();
  const Matrix xtr = features_of(train), xte = features_of(test);
  const Rng root = Rng(seed).split("probe");
  ProbeMatrix out(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix ztr = model.encode(i, xtr), zte = model.encode(i, xte);
    for (std::size_t j = 0; j < n; ++j) {
      const auto cell_seed = root.split("cell" + std::to_string(i) + "." + std::to_string(j)).next_u64();
      out[i][j] = probe_accuracy(ztr, labels_of(train, j), zte, labels_of(test, j), model.factors()[j].cardinality,
                                 cell_seed, config);
    }
  }
  return out;
}

std::vector<double> chance_levels(const FactorList& factors) {
  std::vector<double> c;
  for (const auto& f : factors) c.push_back(1.0 / static_cast<double>(f.cardinality));
  return c;
}

std::vector<double> leakage_scores(const ProbeMatrix& probe, const std::vector<double>& chance) {
  const std::size_t n = probe.size();
  if (chance.size() != n) throw DimensionError("leakage: chance vector length differs from probe matrix");
  std::vector<double> out(n, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) out[i] = std::max(out[i], probe[i][j] - chance[j]);
  return out;
}

std::vector<double> reconstruction_report(const DisentangleModel& model, const Dataset& dataset) {
  if (dataset.empty()) throw DataError("reconstruction: empty dataset");
  const Matrix x = features_of(dataset);
  std::vector<FactorAssignment> labels;
  for (const auto& s : dataset.samples) labels.push_back(s.labels);
  std::vector<double> out;
  for (std::size_t i = 0; i < model.factor_count(); ++i) {
    const Matrix x_hat = model.decode(i, model.encode(i, x), model.one_hot_labels(i, labels));
    out.push_back(l1_loss(x_hat.values(), x.values()));
  }
  return out;
}

SwapResult swap_synthesis(const DisentangleModel& model, std::size_t i, const LabeledSample& a,
                          const LabeledSample& b) {
  const FactorAssignment labels[1] = {b.labels};
  const Matrix label_in = model.one_hot_labels(i, labels);
  const Vector z = model.encode(i, a.features.values);
  std::vector<Vector> parts;
  std::size_t col = 0;
  for (std::size_t j = 0; j < model.factor_count(); ++j) {
    if (j == i) continue;
    const std::size_t card = model.factors()[j].cardinality;
    parts.emplace_back(label_in.row(0).begin() + col, label_in.row(0).begin() + col + card);
    col += card;
  }
  const Vector x_hat = model.decode(i, z, parts);
  SwapResult res;
  std::copy(x_hat.begin(), x_hat.end(), res.features.values.begin());
  res.oracle = oracle_factors(res.features);
  res.kept = res.oracle[i] == a.labels[i];
  res.swapped = true;
  for (std::size_t j = 0; j < model.factor_count(); ++j)
    if (j != i && res.oracle[j] != b.labels[j]) res.swapped = false;
  return res;
}

SwapAgreement swap_agreement(const DisentangleModel& model, std::size_t i, const Dataset& dataset,
                             std::size_t pairs, std::uint64_t seed) {
  if (dataset.empty()) throw DataError("swap: empty dataset");
  Rng rng = Rng(seed).split("swap").split("factor" + std::to_string(i));
  SwapAgreement out;
  out.pairs = pairs;
  std::size_t kept = 0, swapped = 0, joint = 0;
  for (std::size_t p = 0; p < pairs; ++p) {
    const auto& a = dataset.samples[rng.below(dataset.size())];
    const auto& b = dataset.samples[rng.below(dataset.size())];
    const SwapResult r = swap_synthesis(model, i, a, b);
    kept += r.kept;
    swapped += r.swapped;
    joint += r.agreement();
  }
  if (pairs > 0) {
    out.kept = static_cast<double>(kept) / static_cast<double>(pairs);
    out.swapped = static_cast<double>(swapped) / static_cast<double>(pairs);
    out.joint = static_cast<double>(joint) / static_cast<double>(pairs);
  }
  return out;
}

MetricsReport evaluate(const DisentangleModel& model, const Dataset& train, const Dataset& test,
                       std::uint64_t seed, const EvalOptions& options) {
  MetricsReport r;
  r.factors = model.factors();
  r.seed = seed;
  r.probe = probe_matrix(model, train, test, seed, options.probe);
  r.chance = chance_levels(model.factors());
  r.leakage = leakage_scores(r.probe, r.chance);
  r.recon_l1 = reconstruction_report(model, test);
  for (std::size_t i = 0; i < model.factor_count(); ++i)
    r.swap.push_back(swap_agreement(model, i, test, options.swap_pairs, seed));
  return r;
}

json report_to_json(const MetricsReport& r) {
  json doc;
  doc["version"] = kReportFormatVersion;
  doc["probe_matrix"] = r.probe;
  doc["chance"] = r.chance;
  doc["leakage"] = r.leakage;
  doc["recon_l1"] = r.recon_l1;
  json swap = json::object(), detail = json::object();
  for (std::size_t i = 0; i < r.swap.size(); ++i) {
    const std::string name = i < r.factors.size() ? r.factors[i].name : "factor" + std::to_string(i);
    swap[name] = r.swap[i].joint;
    detail[name] = {{"pairs", r.swap[i].pairs}, {"kept", r.swap[i].kept}, {"swapped", r.swap[i].swapped}};
  }
  doc["swap_agreement"] = std::move(swap);
  doc["swap_detail"] = std::move(detail);
  json factors = json::array();
  for (const auto& f : r.factors) factors.push_back({{"name", f.name}, {"cardinality", f.cardinality}});
  doc["factors"] = std::move(factors);
  doc["config"] = r.config;
  doc["seed"] = r.seed;
  return doc;
}

MetricsReport report_from_json(const json& doc) {
  try {
    if (doc.at("version").get<int>() != kReportFormatVersion)
      throw FormatError("report: unsupported version " + doc.at("version").dump());
    MetricsReport r;
    std::size_t id = 0;
    for (const auto& f : doc.at("factors"))
      r.factors.push_back(FactorSpec{id++, f.at("name").get<std::string>(), f.at("cardinality").get<std::size_t>()});
    r.probe = doc.at("probe_matrix").get<ProbeMatrix>();
    r.chance = doc.at("chance").get<std::vector<double>>();
    r.leakage = doc.at("leakage").get<std::vector<double>>();
    r.recon_l1 = doc.at("recon_l1").get<std::vector<double>>();
    for (const auto& f : r.factors) {
      SwapAgreement s;
      s.joint = doc.at("swap_agreement").at(f.name).get<double>();
      const auto& d = doc.at("swap_detail").at(f.name);
      s.pairs = d.at("pairs").get<std::size_t>();
      s.kept = d.at("kept").get<double>();
      s.swapped = d.at("swapped").get<double>();
      r.swap.push_back(s);
    }
    r.config = doc.at("config");
    r.seed = doc.at("seed").get<std::uint64_t>();
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("report: ") + e.what());
  }
}

void emit_report(const MetricsReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << report_to_json(report).dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

MetricsReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(std::string("report: ") + e.what());
  }
  return report_from_json(doc);
}

}  // namespace disent
