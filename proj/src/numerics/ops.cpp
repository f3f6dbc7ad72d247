#include "disent/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "disent/errors.hpp"
#include "disent/numerics/kernels.hpp"

namespace disent {
namespace {

void check_slope(double slope) {
  if (!(slope > 0.0 && slope < 1.0)) throw ArgumentError("leaky_relu slope must lie in (0, 1)");
}

void softmax_span(std::span<double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& e : v) {
    e = std::exp(e - mx);
    sum += e;
  }
  for (double& e : v) e /= sum;
}

}  // namespace

Vector dense_forward(const Matrix& w, std::span<const double> b, std::span<const double> x) {
  if (w.cols() != x.size())
    throw DimensionError("dense_forward: cols(W)=" + std::to_string(w.cols()) +
                         " != len(x)=" + std::to_string(x.size()));
  if (w.rows() != b.size())
    throw DimensionError("dense_forward: rows(W)=" + std::to_string(w.rows()) +
                         " != len(b)=" + std::to_string(b.size()));
  const auto& k = kernels::active();
  Vector y(b.begin(), b.end());
  for (std::size_t o = 0; o < w.rows(); ++o) y[o] += k.dot(w.row(o).data(), x.data(), x.size());
  return y;
}

Matrix dense_forward(const Matrix& x, const Matrix& w, const Matrix& b, std::string_view w_name,
                     std::string_view b_name) {
  if (w.cols() != x.cols())
    throw DimensionError("dense: " + std::string(w_name) + " has " + std::to_string(w.cols()) +
                         " columns but input has width " + std::to_string(x.cols()));
  if (b.rows() != 1 || b.cols() != w.rows())
    throw DimensionError("dense: " + std::string(b_name) + " must be 1x" +
                         std::to_string(w.rows()));
  Matrix y(x.rows(), w.rows());
  for (std::size_t r = 0; r < y.rows(); ++r) std::copy(b.data(), b.data() + b.cols(), y.row(r).data());
  const Matrix wt = w.transposed();
  kernels::active().gemm_nn_acc(x.rows(), w.rows(), x.cols(), x.data(), wt.data(), y.data());
  return y;
}

Vector leaky_relu(std::span<const double> x, double slope) {
  check_slope(slope);
  Vector y(x.begin(), x.end());
  for (double& v : y) v = v > 0.0 ? v : slope * v;
  return y;
}

void leaky_relu_inplace(Matrix& x, double slope) {
  check_slope(slope);
  for (double& v : x.values()) v = v > 0.0 ? v : slope * v;
}

Vector softmax(std::span<const double> logits) {
  if (logits.size() < 2) throw ArgumentError("softmax needs at least two logits");
  Vector p(logits.begin(), logits.end());
  softmax_span(p);
  return p;
}

void softmax_rows_inplace(Matrix& logits) {
  if (logits.cols() < 2) throw ArgumentError("softmax needs at least two logits");
  for (std::size_t r = 0; r < logits.rows(); ++r) softmax_span(logits.row(r));
}

double cross_entropy(std::span<const double> dist, std::size_t true_class) {
  if (true_class >= dist.size())
    throw ArgumentError("cross_entropy: class " + std::to_string(true_class) +
                        " out of range for " + std::to_string(dist.size()) + " classes");
  return -std::log(dist[true_class] + kLogEpsilon);
}

double l1_loss(std::span<const double> x, std::span<const double> x_hat) {
  if (x.size() != x_hat.size())
    throw DimensionError("l1_loss: lengths " + std::to_string(x.size()) + " and " +
                         std::to_string(x_hat.size()));
  if (x.empty()) return 0.0;
  return kernels::active().sum_abs_diff(x.data(), x_hat.data(), x.size()) /
         static_cast<double>(x.size());
}

std::size_t argmax(std::span<const double> v) noexcept {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace disent
