#include "complaintscale/popularity.hpp"

#include <Eigen/Dense>
#include <Eigen/QR>
#include <cmath>
#include <stdexcept>

#include "complaintscale/error.hpp"
#include "complaintscale/metrics.hpp"

namespace cscale {

namespace {

constexpr double kRankThreshold = 1e-10;

std::int64_t bucket_seconds(double hours) {
  if (!(hours > 0.0) || !std::isfinite(hours)) {
    throw std::invalid_argument("bucket_hours must be positive");
  }
  const auto s = static_cast<std::int64_t>(std::llround(hours * 3600.0));
  if (s < 1) throw std::invalid_argument("bucket shorter than one second");
  return s;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

struct Solved {
  Eigen::VectorXd beta;
  Eigen::Index rank = 0;
};

Solved least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(kRankThreshold);
  return {qr.solve(y), qr.rank()};
}

}  // namespace

double log_popularity(std::size_t count) {
  return std::log(static_cast<double>(count) + 1.0);
}

PopularitySeries build_series(std::span<const Post> posts,
                              const std::map<std::size_t, double>& intensities,
                              double bucket_hours) {
  const std::int64_t width = bucket_seconds(bucket_hours);
  if (posts.empty()) throw InsufficientData("cannot build a series from zero posts");
  PopularitySeries series;
  series.hashtag = posts.front().hashtag;
  series.bucket_hours = bucket_hours;
  series.start_timestamp = posts.front().timestamp;
  for (const auto& p : posts) {
    if (p.hashtag != series.hashtag) {
      throw std::invalid_argument("posts span several hashtags ('" + series.hashtag +
                                  "', '" + p.hashtag + "')");
    }
    series.start_timestamp = std::min(series.start_timestamp, p.timestamp);
  }
  std::map<std::int64_t, std::pair<std::size_t, double>> acc;
  std::int64_t last = 0;
  for (const auto& p : posts) {
    auto it = intensities.find(p.id);
    if (it == intensities.end()) {
      throw MissingIntensity("no intensity for post " + std::to_string(p.id));
    }
    const std::int64_t t = floor_div(p.timestamp - series.start_timestamp, width);
    auto& [count, sum] = acc[t];
    ++count;
    sum += it->second;
    last = std::max(last, t);
  }
  series.buckets.resize(static_cast<std::size_t>(last) + 1);
  for (std::int64_t t = 0; t <= last; ++t) series.buckets[t].t_index = t;
  for (const auto& [t, cs] : acc) {
    auto& b = series.buckets[static_cast<std::size_t>(t)];
    b.post_count = cs.first;
    b.density = cs.second / static_cast<double>(cs.first);
  }
  return series;
}

std::vector<PopularitySeries> build_all_series(std::span<const Post> posts,
                                               const std::map<std::size_t, double>& intensities,
                                               double bucket_hours) {
  std::map<std::string, std::vector<Post>> by_tag;
  for (const auto& p : posts) by_tag[p.hashtag].push_back(p);
  std::vector<PopularitySeries> out;
  for (const auto& [tag, group] : by_tag) {
    out.push_back(build_series(group, intensities, bucket_hours));
  }
  return out;
}

double PopularityModel::predict(const PopularityBucket& previous) const {
  const double x = log_popularity(previous.post_count);
  if (variant == PopularityVariant::kBaseline) {
    return coefficients.at(0) * x + coefficients.at(1);
  }
  return coefficients.at(0) * x + coefficients.at(1) * previous.density + coefficients.at(2);
}

PopularityModel fit(const PopularitySeries& series, PopularityVariant variant,
                    std::size_t n_buckets) {
  const std::size_t end = std::min(n_buckets, series.buckets.size());
  const std::size_t pairs = end > 0 ? end - 1 : 0;
  const std::size_t needed = variant == PopularityVariant::kBaseline ? 3 : 4;
  if (pairs < needed) {
    throw InsufficientData("need at least " + std::to_string(needed) +
                           " consecutive bucket pairs, have " + std::to_string(pairs));
  }
  const auto m = static_cast<Eigen::Index>(pairs);
  Eigen::MatrixXd x(m, 3);
  Eigen::VectorXd y(m);
  for (std::size_t i = 1; i < end; ++i) {
    const auto r = static_cast<Eigen::Index>(i - 1);
    x(r, 0) = log_popularity(series.buckets[i - 1].post_count);
    x(r, 1) = series.buckets[i - 1].density;
    x(r, 2) = 1.0;
    y[r] = log_popularity(series.buckets[i].post_count);
  }

  PopularityModel model;
  model.variant = variant;
  if (variant == PopularityVariant::kDensity) {
    const Solved full = least_squares(x, y);
    if (full.rank == 3) {
      model.coefficients = {full.beta[0], full.beta[1], full.beta[2]};
      return model;
    }
    model.rank_deficient = true;
  }
  Eigen::MatrixXd xb(m, 2);
  xb.col(0) = x.col(0);
  xb.col(1) = x.col(2);
  const Solved base = least_squares(xb, y);
  if (base.rank < 2) {
    throw RankDeficient("previous-bucket popularity is constant over the fitting range");
  }
  if (variant == PopularityVariant::kDensity) {
    model.coefficients = {base.beta[0], 0.0, base.beta[1]};
  } else {
    model.coefficients = {base.beta[0], base.beta[1]};
  }
  return model;
}

std::vector<ForecastPoint> forecast(const PopularityModel& model,
                                    const PopularitySeries& series) {
  std::vector<ForecastPoint> out;
  for (std::size_t i = 1; i < series.buckets.size(); ++i) {
    out.push_back({series.buckets[i].t_index, log_popularity(series.buckets[i].post_count),
                   model.predict(series.buckets[i - 1])});
  }
  return out;
}

std::size_t chronological_split(std::size_t n_buckets, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  }
  return static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n_buckets)));
}

PopularityMetrics evaluate(const PopularityModel& model, const PopularitySeries& series,
                           double train_fraction) {
  const std::size_t split = std::max<std::size_t>(
      1, chronological_split(series.buckets.size(), train_fraction));
  std::vector<double> actual, predicted;
  for (std::size_t i = split; i < series.buckets.size(); ++i) {
    actual.push_back(log_popularity(series.buckets[i].post_count));
    predicted.push_back(model.predict(series.buckets[i - 1]));
  }
  if (actual.size() < 2) {
    throw InsufficientData("only " + std::to_string(actual.size()) +
                           " test bucket(s); need at least 2");
  }
  return {metrics::rmse(predicted, actual), metrics::mae(predicted, actual), actual.size()};
}

PopularityReport fit_and_evaluate(const PopularitySeries& series, PopularityVariant variant,
                                  double train_fraction) {
  const std::size_t split = chronological_split(series.buckets.size(), train_fraction);
  PopularityReport report;
  report.model = fit(series, variant, split);
  report.metrics = evaluate(report.model, series, train_fraction);
  for (const auto& pt : forecast(report.model, series)) {
    if (static_cast<std::size_t>(pt.t_index) >= split) report.test_points.push_back(pt);
  }
  return report;
}

}  // namespace cscale
