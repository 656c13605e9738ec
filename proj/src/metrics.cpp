#include "complaintscale/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "complaintscale/error.hpp"

namespace cscale::metrics {

namespace {

void check_paired(std::span<const double> x, std::span<const double> y,
                  std::size_t min_len) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("paired series have different lengths");
  }
  if (x.size() < min_len) {
    throw std::invalid_argument("paired series needs at least " +
                                std::to_string(min_len) + " points");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw std::invalid_argument("non-finite value at index " + std::to_string(i));
    }
  }
}

}  // namespace

double mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("mean of empty series");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double pearson(std::span<const double> x, std::span<const double> y) {
  check_paired(x, y, 2);
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw ZeroVariance("pearson: input series has zero variance");
  }
  // sqrt(sxx * syy) rather than sqrt(sxx) * sqrt(syy): identical inputs then
  // give exactly 1.
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double mse(std::span<const double> x, std::span<const double> y) {
  check_paired(x, y, 1);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s / static_cast<double>(x.size());
}

double rmse(std::span<const double> x, std::span<const double> y) {
  return std::sqrt(mse(x, y));
}

double mae(std::span<const double> x, std::span<const double> y) {
  check_paired(x, y, 1);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - y[i]);
  return s / static_cast<double>(x.size());
}

}  // namespace cscale::metrics
