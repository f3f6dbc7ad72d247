#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "disent/numerics/matrix.hpp"

namespace disent {

inline constexpr double kLeakySlope = 0.01;
// Added inside every logarithm so a saturated predictor yields a finite loss.
inline constexpr double kLogEpsilon = 1e-12;

// Wx + b. W is rows(b) x len(x).
Vector dense_forward(const Matrix& w, std::span<const double> b, std::span<const double> x);
// Batched form: rows of `x` are samples, w is out x in, b is 1 x out. Names are
// used in dimension errors.
Matrix dense_forward(const Matrix& x, const Matrix& w, const Matrix& b,
                     std::string_view w_name = "W", std::string_view b_name = "b");

Vector leaky_relu(std::span<const double> x, double slope = kLeakySlope);
void leaky_relu_inplace(Matrix& x, double slope = kLeakySlope);

// Max-subtracted softmax.
Vector softmax(std::span<const double> logits);
void softmax_rows_inplace(Matrix& logits);

// -ln(dist[true_class] + kLogEpsilon)
double cross_entropy(std::span<const double> dist, std::size_t true_class);

// Mean absolute difference.
double l1_loss(std::span<const double> x, std::span<const double> x_hat);

std::size_t argmax(std::span<const double> v) noexcept;

}  // namespace disent
