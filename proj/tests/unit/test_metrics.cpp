#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "disent/errors.hpp"
#include "disent/metrics/metrics.hpp"
#include "disent/model/model_io.hpp"
#include "disent/synthgen/oracle.hpp"
#include "disent/trainer/trainer.hpp"

using namespace disent;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "disent_test_metrics";
  fs::create_directories(dir);
  return dir;
}

void zero_store(ParamStore& ps) {
  for (auto& s : ps.slots()) s.value.fill(0.0);
}

ProbeConfig quick_probe() {
  ProbeConfig p;
  p.epochs = 60;
  return p;
}

}  // namespace

TEST_CASE("chance levels and leakage") {
  const auto chance = chance_levels(canonical_factors());
  REQUIRE(chance.size() == 3);
  CHECK(chance[0] == 0.25);
  CHECK(chance[1] == 1.0 / 3.0);
  CHECK(chance[2] == 1.0 / 3.0);

  const ProbeMatrix a{{0.95, 0.40, 0.30}, {0.30, 0.90, 0.50}, {0.25, 1.0 / 3.0, 0.99}};
  const auto leak = leakage_scores(a, chance);
  CHECK(leak[0] == doctest::Approx(0.40 - 1.0 / 3.0));
  CHECK(leak[1] == doctest::Approx(0.50 - 1.0 / 3.0));
  CHECK(leak[2] == doctest::Approx(0.0));
  CHECK_THROWS_AS(leakage_scores(a, {0.5, 0.5}), DimensionError);
}

TEST_CASE("constant latents probe at chance") {
  auto model = DisentangleModel::init(canonical_factors(), 3);
  for (std::size_t i = 0; i < 3; ++i) zero_store(model.autoencoder(i).encoder.params());
  const Dataset train = make_dataset(2000, MaskPolicy::full(), 4);
  const Dataset test = make_dataset(2000, MaskPolicy::full(), 5);
  ProbeConfig cfg;
  cfg.epochs = 20;
  const auto pm = probe_matrix(model, train, test, 6, cfg);
  const auto chance = chance_levels(model.factors());
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::fabs(pm[i][j] - chance[j]) <= 0.05);
}

TEST_CASE("one-hot latents are read back exactly") {
  const Dataset train = make_dataset(1000, MaskPolicy::full(), 7);
  const Dataset test = make_dataset(500, MaskPolicy::full(), 8);
  for (std::size_t j = 0; j < 3; ++j) {
    const std::size_t card = canonical_factors()[j].cardinality;
    const auto encode = [&](const Dataset& ds, Matrix& z, std::vector<std::size_t>& y) {
      z = Matrix(ds.size(), 8);
      y.clear();
      for (std::size_t r = 0; r < ds.size(); ++r) {
        z(r, ds.samples[r].labels[j]) = 1.0;
        y.push_back(ds.samples[r].labels[j]);
      }
    };
    Matrix ztr, zte;
    std::vector<std::size_t> ytr, yte;
    encode(train, ztr, ytr);
    encode(test, zte, yte);
    CHECK(probe_accuracy(ztr, ytr, zte, yte, card, 11 + j, quick_probe()) >= 0.99);
  }
}

TEST_CASE("probe matrix on an untrained model: range, purity, determinism") {
  const auto model = DisentangleModel::init(canonical_factors(), 12);
  const auto copy = model;
  const Dataset train = make_dataset(300, MaskPolicy::full(), 13);
  const Dataset test = make_dataset(200, MaskPolicy::full(), 14);
  const auto pm = probe_matrix(model, train, test, 15, quick_probe());
  for (const auto& row : pm)
    for (double v : row) {
      CHECK(std::isfinite(v));
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  CHECK(model.bit_equal(copy));
  CHECK(probe_matrix(model, train, test, 15, quick_probe()) == pm);

  CHECK_THROWS_AS(probe_matrix(model, Dataset{canonical_factors(), {}, "", 0}, test, 1), DataError);
  CHECK_THROWS_AS(probe_matrix(model, train, Dataset{canonical_factors(), {}, "", 0}, 1), DataError);
}

TEST_CASE("reconstruction report") {
  auto model = DisentangleModel::init(canonical_factors(), 21);
  Dataset same = make_dataset(1, MaskPolicy::full(), 22);
  for (int k = 0; k < 9; ++k) same.samples.push_back(same.samples[0]);
  for (std::size_t i = 0; i < 3; ++i) {
    auto& dec = model.autoencoder(i).decoder.params();
    dec[TwoLayerNet::W2].value.fill(0.0);
    for (std::size_t c = 0; c < kFeatureDim; ++c) dec[TwoLayerNet::b2].value(0, c) = same.samples[0].features.values[c];
  }
  for (double v : reconstruction_report(model, same)) CHECK(v == 0.0);

  const auto fresh = DisentangleModel::init(canonical_factors(), 23);
  const Dataset ds = make_dataset(40, MaskPolicy::full(), 24);
  for (double v : reconstruction_report(fresh, ds)) CHECK(v > 0.0);
}

TEST_CASE("reconstruction matches a recomputation from saved files") {
  const fs::path dir = temp_dir();
  {
    auto model = DisentangleModel::init(canonical_factors(), 31);
    TrainConfig c;
    c.total_rounds = 3;
    c.batch_size = 16;
    const std::vector<Dataset> train{make_dataset(64, MaskPolicy::full(), 32)};
    train_loop(model, train, c);
    save_model(dir / "model.json", model);
    save_dataset(dir / "data.ndjson", make_dataset(50, MaskPolicy::full(), 33));
  }
  const auto model = load_model(dir / "model.json");
  const Dataset ds = load_dataset(dir / "data.ndjson");
  const auto report = reconstruction_report(model, ds);
  for (std::size_t i = 0; i < 3; ++i) {
    double total = 0.0;
    for (const auto& s : ds.samples) {
      std::vector<Vector> labels;
      for (std::size_t j = 0; j < 3; ++j) {
        if (j == i) continue;
        Vector one_hot(ds.factors[j].cardinality, 0.0);
        one_hot[s.labels[j]] = 1.0;
        labels.push_back(one_hot);
      }
      const Vector x_hat = model.decode(i, model.encode(i, s.features.values), labels);
      for (std::size_t k = 0; k < kFeatureDim; ++k) total += std::fabs(x_hat[k] - s.features.values[k]);
    }
    CHECK(report[i] == doctest::Approx(total / (ds.size() * kFeatureDim)).epsilon(1e-12));
  }
}

TEST_CASE("swap synthesis decodes a's latent with b's labels") {
  const auto model = DisentangleModel::init(canonical_factors(), 41);
  const Dataset ds = make_dataset(2, MaskPolicy::full(), 42);
  const auto& a = ds.samples[0];
  const auto& b = ds.samples[1];
  for (std::size_t i = 0; i < 3; ++i) {
    const SwapResult r = swap_synthesis(model, i, a, b);
    std::vector<Vector> labels;
    for (std::size_t j = 0; j < 3; ++j) {
      if (j == i) continue;
      Vector one_hot(ds.factors[j].cardinality, 0.0);
      one_hot[b.labels[j]] = 1.0;
      labels.push_back(one_hot);
    }
    const Vector expect = model.decode(i, model.encode(i, a.features.values), labels);
    for (std::size_t k = 0; k < kFeatureDim; ++k) CHECK(r.features.values[k] == expect[k]);
    CHECK(r.oracle == oracle_factors(r.features));
    CHECK(r.kept == (r.oracle[i] == a.labels[i]));

    // Degenerate swap is a reconstruction check.
    const SwapResult same = swap_synthesis(model, i, a, a);
    CHECK(same.agreement() == (same.oracle == a.labels));
  }
}

TEST_CASE("untrained swap agreement sits near the product of chance levels") {
  const auto model = DisentangleModel::init(canonical_factors(), 51);
  const Dataset ds = make_dataset(400, MaskPolicy::full(), 52);
  const double product = 0.25 / 9.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto s = swap_agreement(model, i, ds, 500, 53);
    CHECK(s.pairs == 500);
    CHECK(std::fabs(s.joint - product) <= 0.03);
    CHECK(s.joint <= std::min(s.kept, s.swapped));
  }
}

TEST_CASE("report file round trip") {
  const auto model = DisentangleModel::init(canonical_factors(), 71);
  const Dataset train = make_dataset(120, MaskPolicy::full(), 72);
  const Dataset test = make_dataset(80, MaskPolicy::full(), 73);
  EvalOptions opt;
  opt.probe = quick_probe();
  opt.swap_pairs = 40;
  MetricsReport r = evaluate(model, train, test, 74, opt);
  r.config = {{"total_rounds", 0}, {"seed", 74}};

  const fs::path path = temp_dir() / "report.json";
  emit_report(r, path);
  const MetricsReport back = load_report(path);
  CHECK(back.probe == r.probe);
  CHECK(back.chance == r.chance);
  CHECK(back.chance == std::vector<double>{0.25, 1.0 / 3.0, 1.0 / 3.0});
  CHECK(back.leakage == r.leakage);
  CHECK(back.recon_l1 == r.recon_l1);
  CHECK(back.seed == 74);
  CHECK(back.config == r.config);
  REQUIRE(back.swap.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.swap[i].joint == r.swap[i].joint);
    CHECK(back.swap[i].kept == r.swap[i].kept);
    CHECK(back.swap[i].pairs == 40);
  }
  const auto doc = report_to_json(r);
  std::vector<std::string> keys;
  for (const auto& item : doc.items()) keys.push_back(item.key());
  CHECK(keys.front() == "version");
  for (const char* k : {"probe_matrix", "chance", "leakage", "recon_l1", "swap_agreement", "config", "seed"})
    CHECK(doc.contains(k));
  CHECK(doc["swap_agreement"].contains("pitch"));

  CHECK_THROWS_AS(emit_report(r, temp_dir() / "missing_dir" / "r.json"), IoError);
}
