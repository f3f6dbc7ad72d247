#include "disent/cli/commands.hpp"

#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>

#include "disent/cli/run_config.hpp"
#include "disent/errors.hpp"
#include "disent/metrics/metrics.hpp"
#include "disent/model/model_io.hpp"
#include "disent/synthgen/dataset.hpp"
#include "disent/trainer/grad_check.hpp"
#include "disent/trainer/history_io.hpp"
#include "disent/trainer/trainer.hpp"

namespace disent::cli {

namespace {

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kBadArguments;
  } catch (const ArgumentError& e) {
    err << "bad argument: " << e.what() << '\n';
    return kBadArguments;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kBadArguments;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataInconsistent;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << '\n';
    return kFormatError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kCheckFailed;
  }
}

RunConfig resolve(const CommonArgs& args) {
  RunConfig c = args.config_path.empty() ? RunConfig{} : load_run_config(args.config_path);
  if (args.seed) c.set_seed(*args.seed);
  return c;
}

const std::string& require_path(const std::string& path, const char* what) {
  if (path.empty()) throw ArgumentError(std::string("no ") + what + " given");
  return path;
}

std::string pick(const std::string& flag, const std::string& configured) {
  return flag.empty() ? configured : flag;
}

}  // namespace

int cmd_gen_data(const CommonArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig c = resolve(args);
    const std::string path = require_path(pick(args.out, c.dataset_out), "output path (--out or dataset_out)");
    const Dataset ds = make_dataset(c.n_samples, c.mask_policy, c.seed);
    save_dataset(path, ds);
    out << "samples " << ds.size() << '\n';
    const auto visible = ds.visibility_counts();
    out << "visible";
    for (std::size_t f = 0; f < ds.factors.size(); ++f) out << ' ' << ds.factors[f].name << '=' << visible[f];
    out << '\n';
    return kSuccess;
  });
}

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig c = resolve(args.common);
    const std::vector<std::string> paths = args.data.empty() ? c.train_data : args.data;
    if (paths.empty()) throw ArgumentError("no training datasets (positional paths or train_data)");
    const std::string model_path = require_path(pick(args.common.out, c.model_out), "model path (--out or model_out)");
    const std::string history_path = pick(args.history, c.history_out);

    std::vector<Dataset> datasets;
    for (const auto& p : paths) datasets.push_back(load_dataset(p));
    for (const auto& d : datasets)
      if (d.factors != datasets.front().factors) throw DataError("datasets disagree on their factors");

    DisentangleModel model = DisentangleModel::init(datasets.front().factors, c.seed);
    try {
      c.train.validate(model.factor_count());
    } catch (const ArgumentError& e) {
      const std::string what = e.what();
      throw ConfigError(what.substr(0, what.find(':')), what);
    }
    const TrainHistory history = train_loop(model, datasets, c.train);
    save_model(model_path, model);
    if (!history_path.empty()) save_history(history_path, history);

    out << "rounds " << history.size() << '\n';
    if (!history.rounds.empty()) {
      out << std::setprecision(6);
      for (const auto& f : history.rounds.back().factors) {
        out << model.factors()[f.factor].name << ": l_rec " << f.l_rec;
        for (const auto& [j, l] : f.l_adv) out << " l_adv[" << model.factors()[j].name << "] " << l;
        if (f.certainty) out << " certainty " << *f.certainty;
        out << '\n';
      }
    }
    return kSuccess;
  });
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig c = resolve(args.common);
    const DisentangleModel model = load_model(require_path(args.model, "model path (--model)"));
    const Dataset train = load_dataset(require_path(pick(args.train_split, c.eval_train), "train split"));
    const Dataset test = load_dataset(require_path(pick(args.test_split, c.eval_test), "test split"));
    const std::string report_path = require_path(pick(args.common.out, c.report_out), "report path (--out or report_out)");

    MetricsReport report = evaluate(model, train, test, c.seed, c.eval_options());
    report.config = c.to_json();
    emit_report(report, report_path);

    out << std::fixed << std::setprecision(3) << "probe matrix (row: latent, column: factor)\n";
    for (const auto& row : report.probe) {
      for (double v : row) out << ' ' << v;
      out << '\n';
    }
    for (std::size_t i = 0; i < report.factors.size(); ++i)
      out << report.factors[i].name << ": leakage " << report.leakage[i] << " recon_l1 " << report.recon_l1[i]
          << " swap " << report.swap[i].joint << '\n';
    return kSuccess;
  });
}

int cmd_swap(const SwapArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const DisentangleModel model = load_model(require_path(args.model, "model path (--model)"));
    const Dataset ds = load_dataset(require_path(args.dataset, "dataset path (--data)"));
    if (ds.factors != model.factors()) throw DataError("dataset factors differ from the model's");
    if (args.factor >= model.factor_count()) throw ArgumentError("factor index out of range");
    if (args.index_a >= ds.size() || args.index_b >= ds.size())
      throw ArgumentError("sample index out of range (dataset has " + std::to_string(ds.size()) + ")");

    const auto& a = ds.samples[args.index_a];
    const auto& b = ds.samples[args.index_b];
    const SwapResult r = swap_synthesis(model, args.factor, a, b);
    out << "latent from sample " << args.index_a << ", labels from sample " << args.index_b << " (factor "
        << model.factors()[args.factor].name << " kept)\n";
    for (std::size_t f = 0; f < model.factor_count(); ++f) {
      const std::size_t expected = f == args.factor ? a.labels[f] : b.labels[f];
      out << model.factors()[f].name << ": source " << a.labels[f] << " target " << b.labels[f] << " expected "
          << expected << " oracle " << r.oracle[f] << (r.oracle[f] == expected ? " ok" : " MISMATCH") << '\n';
    }
    out << "kept " << (r.kept ? "yes" : "no") << " swapped " << (r.swapped ? "yes" : "no") << " agreement "
        << (r.agreement() ? "yes" : "no") << '\n';
    if (!args.dump.empty()) {
      std::ofstream f(args.dump);
      if (!f) throw IoError("cannot open " + args.dump);
      nlohmann::ordered_json doc;
      doc["features"] = r.features.values;
      doc["oracle"] = r.oracle;
      f << doc.dump() << '\n';
    }
    return kSuccess;
  });
}

int cmd_grad_check(const GradCheckArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    GradCheckOptions opt;
    opt.seed = args.seed;
    opt.corrupt_backward = args.corrupt_backward;
    const GradCheckReport report = run_grad_check(opt);
    out << std::scientific << std::setprecision(3);
    for (const auto& f : report.families)
      out << f.family << ": " << f.params_checked << " params, max rel error " << f.max_rel_error << " ("
          << f.worst_slot << '[' << f.worst_index << "]), kinks skipped " << f.kinks_skipped << '\n';
    out << "max rel error " << report.max_rel_error() << " tolerance " << report.tolerance << '\n';
    if (!report.passed()) {
      const auto& w = report.worst();
      err << "gradient check FAILED: worst slot " << w.worst_slot << " (" << w.family << ")\n";
      return kCheckFailed;
    }
    out << "gradient check passed\n";
    return kSuccess;
  });
}

}  // namespace disent::cli
