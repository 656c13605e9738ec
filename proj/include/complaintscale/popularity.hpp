#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "complaintscale/corpus.hpp"

namespace cscale {

struct PopularityBucket {
  std::int64_t t_index = 0;
  std::size_t post_count = 0;
  // Sum of the bucket's intensities over post_count; 0 for an empty bucket.
  double density = 0.0;

  bool operator==(const PopularityBucket&) const = default;
};

struct PopularitySeries {
  std::string hashtag;
  double bucket_hours = 2.0;
  std::int64_t start_timestamp = 0;
  std::vector<PopularityBucket> buckets;  // t_index 0, 1, 2, ... without gaps

  bool operator==(const PopularitySeries&) const = default;
};

// ln(p + 1) of a bucket count. The +1 keeps empty buckets finite.
double log_popularity(std::size_t count);

// Buckets start at the earliest timestamp; a post at time t falls in bucket
// floor((t - start) / bucket_hours). Interior empty buckets are kept with
// count 0. Throws std::invalid_argument for mixed hashtags or bucket_hours
// <= 0, MissingIntensity for a post without a score, InsufficientData for
// no posts.
PopularitySeries build_series(std::span<const Post> posts,
                              const std::map<std::size_t, double>& intensities,
                              double bucket_hours = 2.0);

// One series per hashtag, ordered by hashtag.
std::vector<PopularitySeries> build_all_series(std::span<const Post> posts,
                                               const std::map<std::size_t, double>& intensities,
                                               double bucket_hours = 2.0);

enum class PopularityVariant {
  kBaseline,  // ln p(t_i) = a1 ln p(t_{i-1}) + a2
  kDensity,   // ln p(t_i) = b1 ln p(t_{i-1}) + b2 d(t_{i-1}) + b3
};

struct PopularityModel {
  PopularityVariant variant = PopularityVariant::kBaseline;
  // (a1, a2) for the baseline, (b1, b2, b3) for the density variant.
  std::vector<double> coefficients;
  // Density column was not identifiable; b2 was fixed at 0 and (b1, b3)
  // fitted as the baseline.
  bool rank_deficient = false;

  // Predicted ln(p(t_i) + 1) from the observed previous bucket.
  double predict(const PopularityBucket& previous) const;
};

// Least squares over consecutive bucket pairs (i-1, i) with i < n_buckets
// (clamped to the series length). Needs 3 pairs for the baseline and 4 for
// the density variant (InsufficientData). A baseline whose regressor is
// constant throws RankDeficient; a density fit whose density column is
// collinear falls back as described on PopularityModel.
PopularityModel fit(const PopularitySeries& series, PopularityVariant variant,
                    std::size_t n_buckets = SIZE_MAX);

struct ForecastPoint {
  std::int64_t t_index = 0;
  double actual = 0.0;     // ln(count + 1)
  double predicted = 0.0;  // one step ahead from the observed bucket i-1
};

// One point for every bucket i >= 1.
std::vector<ForecastPoint> forecast(const PopularityModel& model,
                                    const PopularitySeries& series);

// First bucket index of the test range: floor(train_fraction * size).
std::size_t chronological_split(std::size_t n_buckets, double train_fraction);

struct PopularityMetrics {
  double rmse = 0.0;  // ln scale
  double mae = 0.0;
  std::size_t n_test = 0;
};

// Scores the one-step forecasts of the buckets from the chronological split
// onwards. Throws InsufficientData with fewer than 2 test buckets.
PopularityMetrics evaluate(const PopularityModel& model, const PopularitySeries& series,
                           double train_fraction = 0.8);

struct PopularityReport {
  PopularityModel model;
  PopularityMetrics metrics;
  std::vector<ForecastPoint> test_points;
};

// Fits on the buckets before the split and evaluates on the rest.
PopularityReport fit_and_evaluate(const PopularitySeries& series, PopularityVariant variant,
                                  double train_fraction = 0.8);

}  // namespace cscale
