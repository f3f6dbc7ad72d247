#include <iostream>

#include "CLI11.hpp"
#include "disent/cli/commands.hpp"

using namespace disent::cli;

namespace {

void add_common(CLI::App* cmd, CommonArgs& common, std::optional<std::uint64_t>& seed) {
  cmd->add_option("--config", common.config_path, "run configuration (JSON)");
  cmd->add_option("--seed", seed, "overrides the config seed");
  cmd->add_option("--out", common.out, "output file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factor-wise adversarial auto-encoders on a synthetic harmonic benchmark"};
  app.require_subcommand(1);

  CommonArgs gen;
  std::optional<std::uint64_t> gen_seed;
  auto* gen_cmd = app.add_subcommand("gen-data", "generate a labeled dataset");
  add_common(gen_cmd, gen, gen_seed);

  TrainArgs train;
  std::optional<std::uint64_t> train_seed;
  auto* train_cmd = app.add_subcommand("train", "train the model on one or more datasets");
  add_common(train_cmd, train.common, train_seed);
  train_cmd->add_option("--history", train.history, "history output (NDJSON)");
  train_cmd->add_option("data", train.data, "dataset files");

  EvalArgs eval;
  std::optional<std::uint64_t> eval_seed;
  auto* eval_cmd = app.add_subcommand("eval", "probe, reconstruction and swap metrics");
  add_common(eval_cmd, eval.common, eval_seed);
  eval_cmd->add_option("--model", eval.model, "model file")->required();
  eval_cmd->add_option("--train", eval.train_split, "probe training split");
  eval_cmd->add_option("--test", eval.test_split, "probe test split");

  SwapArgs swap;
  auto* swap_cmd = app.add_subcommand("swap", "decode one sample's latent with another's labels");
  swap_cmd->add_option("--model", swap.model, "model file")->required();
  swap_cmd->add_option("--data", swap.dataset, "dataset file")->required();
  swap_cmd->add_option("--factor", swap.factor, "auto-encoder whose latent is kept")->required();
  swap_cmd->add_option("--a", swap.index_a, "latent source index")->required();
  swap_cmd->add_option("--b", swap.index_b, "label source index")->required();
  swap_cmd->add_option("--dump", swap.dump, "write synthesized features as JSON");

  GradCheckArgs grad;
  auto* grad_cmd = app.add_subcommand("grad-check", "finite-difference check of every network family");
  grad_cmd->add_option("--seed", grad.seed, "seed");
  grad_cmd->add_flag("--corrupt-backward", grad.corrupt_backward)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kBadArguments;
  }

  if (*gen_cmd) {
    gen.seed = gen_seed;
    return cmd_gen_data(gen, std::cout, std::cerr);
  }
  if (*train_cmd) {
    train.common.seed = train_seed;
    return cmd_train(train, std::cout, std::cerr);
  }
  if (*eval_cmd) {
    eval.common.seed = eval_seed;
    return cmd_eval(eval, std::cout, std::cerr);
  }
  if (*swap_cmd) return cmd_swap(swap, std::cout, std::cerr);
  return cmd_grad_check(grad, std::cout, std::cerr);
}
