#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "complaintscale/error.hpp"
#include "complaintscale/metrics.hpp"
#include "complaintscale/rng.hpp"

using namespace cscale;
using V = std::vector<double>;

TEST_CASE("pearson on exact lines") {
  CHECK(metrics::pearson(V{1, 2, 3}, V{2, 4, 6}) == 1.0);
  CHECK(metrics::pearson(V{1, 2, 3}, V{3, 2, 1}) == -1.0);
  const V x{0.3, -0.7, 0.11, 0.9};
  CHECK(metrics::pearson(x, x) == 1.0);
}

TEST_CASE("pearson matches the covariance formula by hand") {
  // dx = (-1, 0, 1), dy = (-4/3, -1/3, 5/3): sxy = 3, sxx = 2, syy = 42/9,
  // so r = 3 / sqrt(84/9) = 9 / (2 sqrt 21).
  const double oracle = 9.0 / (2.0 * std::sqrt(21.0));
  CHECK(oracle == doctest::Approx(0.98198).epsilon(1e-5));
  CHECK(metrics::pearson(V{1, 2, 3}, V{1, 2, 4}) == doctest::Approx(oracle).epsilon(1e-14));
}

TEST_CASE("pearson rejects constant and malformed input") {
  CHECK_THROWS_AS(metrics::pearson(V{1, 1, 1}, V{1, 2, 3}), ZeroVariance);
  CHECK_THROWS_AS(metrics::pearson(V{1, 2, 3}, V{5, 5, 5}), ZeroVariance);
  CHECK_THROWS_AS(metrics::pearson(V{1}, V{1}), std::invalid_argument);
  CHECK_THROWS_AS(metrics::pearson(V{1, 2}, V{1, 2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(metrics::pearson(V{1, std::numeric_limits<double>::quiet_NaN()}, V{1, 2}),
                  std::invalid_argument);
}

TEST_CASE("error metrics on small vectors") {
  CHECK(metrics::mse(V{0.5, 2}, V{0.5, 2}) == 0.0);
  CHECK(metrics::rmse(V{0.5, 2}, V{0.5, 2}) == 0.0);
  CHECK(metrics::mae(V{0.5, 2}, V{0.5, 2}) == 0.0);
  CHECK(metrics::mse(V{0, 0}, V{1, 1}) == 1.0);
  CHECK(metrics::rmse(V{0, 0}, V{1, 1}) == 1.0);
  CHECK(metrics::mae(V{0, 0}, V{1, 1}) == 1.0);
  // (1 + 9) / 2 = 5 and (1 + 3) / 2 = 2.
  CHECK(metrics::mse(V{0, 0}, V{1, 3}) == 5.0);
  CHECK(metrics::rmse(V{0, 0}, V{1, 3}) == doctest::Approx(2.23607).epsilon(1e-6));
  CHECK(metrics::mae(V{0, 0}, V{1, 3}) == 2.0);
  CHECK_THROWS_AS(metrics::mse(V{}, V{}), std::invalid_argument);
}

TEST_CASE("properties over random vectors") {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(30);
    V x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.normal(0.0, 3.0);
      y[i] = 0.4 * x[i] + rng.normal();
    }
    const double mse = metrics::mse(x, y);
    const double rmse = metrics::rmse(x, y);
    CHECK(std::abs(rmse * rmse - mse) <= 1e-12 * mse);
    CHECK(metrics::mae(x, y) <= rmse * (1 + 1e-12));

    const double r = metrics::pearson(x, y);
    CHECK(r >= -1.0);
    CHECK(r <= 1.0);
    V ax(n), ny(n);
    for (std::size_t i = 0; i < n; ++i) {
      ax[i] = 2.5 * x[i] - 7.0;
      ny[i] = -0.3 * y[i] + 1.0;
    }
    CHECK(metrics::pearson(ax, y) == doctest::Approx(r).epsilon(1e-9));
    CHECK(metrics::pearson(x, ny) == doctest::Approx(-r).epsilon(1e-9));
  }
}
