#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace disent::cli {

enum ExitCode : int {
  kSuccess = 0,
  kCheckFailed = 1,
  kBadArguments = 2,
  kDataInconsistent = 3,
  kFormatError = 4,
};

// Settings shared by every subcommand. Flags override config-file values.
struct CommonArgs {
  std::string config_path;  // empty: built-in defaults
  std::optional<std::uint64_t> seed;
  std::string out;
};

struct TrainArgs {
  CommonArgs common;
  std::vector<std::string> data;  // overrides train_data
  std::string history;            // overrides history_out
};

struct EvalArgs {
  CommonArgs common;
  std::string model;
  std::string train_split;  // overrides eval_train
  std::string test_split;   // overrides eval_test
};

struct SwapArgs {
  std::string model;
  std::string dataset;
  std::size_t factor = 0;
  std::size_t index_a = 0;
  std::size_t index_b = 0;
  std::string dump;  // optional JSON dump of the synthesized features
};

struct GradCheckArgs {
  std::uint64_t seed = 1;
  bool corrupt_backward = false;
};

// Each command writes progress to `out`, diagnostics to `err`, and maps
// library errors onto the exit codes above.
int cmd_gen_data(const CommonArgs& args, std::ostream& out, std::ostream& err);
int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);
int cmd_swap(const SwapArgs& args, std::ostream& out, std::ostream& err);
int cmd_grad_check(const GradCheckArgs& args, std::ostream& out, std::ostream& err);

}  // namespace disent::cli
