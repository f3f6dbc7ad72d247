#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace disent {

struct GradCheckOptions {
  std::uint64_t seed = 1;
  std::size_t params_per_family = 128;
  double step = 1e-5;
  double tolerance = 1e-4;
  // Runs the analytic pass with a deliberately wrong leaky-ReLU backward rule.
  bool corrupt_backward = false;
};

struct FamilyCheck {
  std::string family;  // encoder, decoder, predictor, composed
  std::size_t params_requested = 0;
  std::size_t params_checked = 0;
  std::size_t kinks_skipped = 0;
  double max_rel_error = 0.0;
  std::string worst_slot;
  std::size_t worst_index = 0;  // flat index into worst_slot
};

struct GradCheckReport {
  std::vector<FamilyCheck> families;
  double tolerance = 0.0;

  double max_rel_error() const;
  const FamilyCheck& worst() const;
  bool passed() const;
};

// Compares tape gradients with central differences on randomly chosen
// parameters of a freshly initialised three-factor model:
//   encoder, decoder - reconstruction loss of one auto-encoder
//   predictor        - cross-entropy of one predictor
//   composed         - full L_i on a batch mixing labeled and hidden targets,
//                      with respect to encoder and decoder parameters
// Relative error is |a - n| / max(|a|, |n|, 1e-6 * max(1, |loss|)); the floor
// is the smallest gradient a step of 1e-5 resolves above rounding noise.
// Parameters whose one-sided differences disagree (a kink within one step)
// are redrawn. A family that cannot collect params_per_family usable
// parameters fails.
GradCheckReport run_grad_check(const GradCheckOptions& options = {});

}  // namespace disent
