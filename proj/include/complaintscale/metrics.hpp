#pragma once

#include <span>

namespace cscale::metrics {

// Sample Pearson correlation. The 1/(n-1) factors cancel, so the value is
// identical to the population form. Throws ZeroVariance when either side is
// constant, std::invalid_argument on length mismatch, fewer than 2 points,
// or non-finite input. The result is clamped to [-1, 1].
double pearson(std::span<const double> x, std::span<const double> y);

// Error metrics with 1/n normalization. Require equal, non-zero lengths.
double mse(std::span<const double> x, std::span<const double> y);
double rmse(std::span<const double> x, std::span<const double> y);
double mae(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> x);

}  // namespace cscale::metrics
