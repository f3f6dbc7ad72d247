#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "disent/numerics/matrix.hpp"
#include "disent/numerics/rng.hpp"
#include "disent/synthgen/dataset.hpp"

namespace disent {

inline constexpr std::size_t kHiddenLabel = std::numeric_limits<std::size_t>::max();

// Training view of a set of samples. Labels hidden by a sample's annotation
// mask are replaced by kHiddenLabel, so training code cannot read them.
struct Batch {
  Matrix features;                              // rows x 128
  std::vector<std::vector<std::size_t>> labels;  // [factor][row]

  std::size_t rows() const noexcept { return features.rows(); }
  std::size_t factor_count() const noexcept { return labels.size(); }
  bool visible(std::size_t factor, std::size_t row) const { return labels[factor][row] != kHiddenLabel; }
  bool fully_labeled() const;
  std::vector<std::size_t> visible_rows(std::size_t factor) const;
  std::vector<std::size_t> hidden_rows(std::size_t factor) const;
  // Labels of visible_rows(factor), same order.
  std::vector<std::size_t> visible_labels(std::size_t factor) const;
};

Batch make_batch(const Dataset& ds, std::span<const std::size_t> indices);
Batch make_batch(const Dataset& ds);  // whole dataset in order

// Draws batches round-robin across datasets; within a dataset, samples are
// taken without replacement from a shuffled order that is reshuffled once
// exhausted.
class BatchStream {
 public:
  BatchStream(std::span<const Dataset> datasets, std::size_t batch_size, Rng rng);
  Batch next();
  std::size_t next_dataset() const noexcept { return cursor_; }

 private:
  std::span<const Dataset> datasets_;
  std::size_t batch_size_;
  Rng rng_;
  std::size_t cursor_ = 0;
  std::vector<std::vector<std::size_t>> order_;
  std::vector<std::size_t> position_;
};

}  // namespace disent
