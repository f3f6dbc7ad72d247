#include "disent/trainer/batch.hpp"

#include <algorithm>
#include <numeric>

#include "disent/errors.hpp"

namespace disent {

bool Batch::fully_labeled() const {
  for (const auto& col : labels)
    for (std::size_t v : col)
      if (v == kHiddenLabel) return false;
  return true;
}

std::vector<std::size_t> Batch::visible_rows(std::size_t factor) const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < rows(); ++r)
    if (visible(factor, r)) out.push_back(r);
  return out;
}

std::vector<std::size_t> Batch::hidden_rows(std::size_t factor) const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < rows(); ++r)
    if (!visible(factor, r)) out.push_back(r);
  return out;
}

std::vector<std::size_t> Batch::visible_labels(std::size_t factor) const {
  std::vector<std::size_t> out;
  for (std::size_t v : labels[factor])
    if (v != kHiddenLabel) out.push_back(v);
  return out;
}

Batch make_batch(const Dataset& ds, std::span<const std::size_t> indices) {
  Batch b;
  b.features = Matrix(indices.size(), kFeatureDim);
  b.labels.assign(ds.factors.size(), std::vector<std::size_t>(indices.size(), kHiddenLabel));
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const LabeledSample& s = ds.samples.at(indices[r]);
    std::copy(s.features.values.begin(), s.features.values.end(), b.features.row(r).begin());
    for (std::size_t f = 0; f < ds.factors.size(); ++f)
      if (s.mask[f]) b.labels[f][r] = s.labels[f];
  }
  return b;
}

Batch make_batch(const Dataset& ds) {
  std::vector<std::size_t> all(ds.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return make_batch(ds, all);
}

BatchStream::BatchStream(std::span<const Dataset> datasets, std::size_t batch_size, Rng rng)
    : datasets_(datasets), batch_size_(batch_size), rng_(rng) {
  if (datasets_.empty()) throw ArgumentError("BatchStream needs at least one dataset");
  for (const auto& d : datasets_) {
    if (d.empty()) throw DataError("BatchStream: empty dataset");
    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    order_.push_back(std::move(idx));
  }
  position_.assign(datasets_.size(), 0);
  for (auto& o : order_) {
    for (std::size_t k = o.size(); k > 1; --k) std::swap(o[k - 1], o[rng_.below(k)]);
  }
}

Batch BatchStream::next() {
  const std::size_t d = cursor_;
  cursor_ = (cursor_ + 1) % datasets_.size();
  auto& order = order_[d];
  std::vector<std::size_t> picked;
  picked.reserve(batch_size_);
  while (picked.size() < batch_size_) {
    if (position_[d] == order.size()) {
      for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng_.below(k)]);
      position_[d] = 0;
    }
    picked.push_back(order[position_[d]++]);
  }
  return make_batch(datasets_[d], picked);
}

}  // namespace disent
