#include <doctest.h>

#include <cmath>

#include "complaintscale/error.hpp"
#include "complaintscale/popularity.hpp"
#include "complaintscale/rng.hpp"

using namespace cscale;

namespace {

Post at_hour(std::size_t id, double hours, std::string tag = "t") {
  Post p;
  p.id = id;
  p.hashtag = std::move(tag);
  p.timestamp = 1'600'000'000 + static_cast<std::int64_t>(hours * 3600);
  return p;
}

PopularitySeries series_of(const std::vector<std::size_t>& counts,
                           const std::vector<double>& density) {
  PopularitySeries s;
  s.hashtag = "t";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    s.buckets.push_back({static_cast<std::int64_t>(i), counts[i], density[i]});
  }
  return s;
}

// Integer counts whose log series follows the density model exactly: the
// count is picked first, then d(t_{i-1}) solved from the model equation.
PopularitySeries exact_density_series(Rng& rng, std::size_t n, double b1, double b2, double b3) {
  std::vector<std::size_t> counts{20};
  std::vector<double> density;
  for (std::size_t i = 1; i < n; ++i) {
    const double prev = log_popularity(counts.back());
    const double target = b1 * prev + b2 * rng.uniform(-1.0, 1.0) + b3;
    const auto c = static_cast<std::size_t>(std::max(0.0, std::round(std::exp(target) - 1)));
    counts.push_back(c);
    density.push_back((log_popularity(c) - b1 * prev - b3) / b2);
  }
  density.push_back(0.0);
  return series_of(counts, density);
}

}  // namespace

TEST_CASE("series binning and density") {
  const std::vector<Post> posts{at_hour(0, 0), at_hour(1, 1), at_hour(2, 3)};
  const std::map<std::size_t, double> inten{{0, 0.5}, {1, -0.5}, {2, 1.0}};
  const auto s = build_series(posts, inten, 2.0);
  REQUIRE(s.buckets.size() == 2);
  CHECK(s.buckets[0].post_count == 2);
  CHECK(s.buckets[1].post_count == 1);
  CHECK(s.buckets[0].density == 0.0);
  CHECK(s.buckets[1].density == 1.0);

  const std::vector<Post> three{at_hour(0, 0), at_hour(1, 0.5), at_hour(2, 1.5), at_hour(3, 5)};
  const std::map<std::size_t, double> i3{{0, 0.5}, {1, -0.5}, {2, 1.0}, {3, 0.0}};
  const auto g = build_series(three, i3, 2.0);
  REQUIRE(g.buckets.size() == 3);
  CHECK(g.buckets[0].density == doctest::Approx(1.0 / 3));
  CHECK(g.buckets[1].post_count == 0);
  CHECK(g.buckets[1].density == 0.0);
  CHECK(g.buckets[2].t_index == 2);
}

TEST_CASE("series errors") {
  const std::vector<Post> mixed{at_hour(0, 0, "a"), at_hour(1, 1, "b")};
  const std::map<std::size_t, double> inten{{0, 0.0}, {1, 0.0}};
  CHECK_THROWS_AS(build_series(mixed, inten), std::invalid_argument);
  const std::vector<Post> one{at_hour(0, 0)};
  CHECK_THROWS_AS(build_series(one, {}), MissingIntensity);
  CHECK_THROWS_AS(build_series(std::vector<Post>{}, {}), InsufficientData);
  CHECK_THROWS_AS(build_series(one, inten, 0.0), std::invalid_argument);
  CHECK(build_all_series(mixed, inten).size() == 2);
}

TEST_CASE("alternating counts recover the baseline exactly") {
  // ln20 = a1 ln10 + a2 and ln10 = a1 ln20 + a2 give a1 = -1, a2 = ln 200.
  std::vector<std::size_t> counts;
  for (int i = 0; i < 12; ++i) counts.push_back(i % 2 ? 19 : 9);
  const auto s = series_of(counts, std::vector<double>(12, 0.0));
  const auto m = fit(s, PopularityVariant::kBaseline);
  CHECK(m.coefficients[0] == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(m.coefficients[1] == doctest::Approx(std::log(200.0)).epsilon(1e-9));
  for (const auto& p : forecast(m, s)) CHECK(std::abs(p.actual - p.predicted) < 1e-9);
}

TEST_CASE("constant counts are rank deficient for the baseline") {
  const auto s = series_of(std::vector<std::size_t>(10, 5), std::vector<double>(10, 0.2));
  CHECK_THROWS_AS(fit(s, PopularityVariant::kBaseline), RankDeficient);
}

TEST_CASE("noise-free density series recovers its coefficients") {
  Rng rng(21);
  const auto s = exact_density_series(rng, 60, 0.9, 0.5, 0.3);
  const auto m = fit(s, PopularityVariant::kDensity);
  CHECK_FALSE(m.rank_deficient);
  CHECK(std::abs(m.coefficients[0] - 0.9) < 1e-6);
  CHECK(std::abs(m.coefficients[1] - 0.5) < 1e-6);
  CHECK(std::abs(m.coefficients[2] - 0.3) < 1e-6);
  const auto own = fit_and_evaluate(s, PopularityVariant::kDensity);
  CHECK(own.metrics.rmse < 1e-9);
  CHECK(own.metrics.mae < 1e-9);
  CHECK(own.metrics.n_test == 12);
}

TEST_CASE("fit needs enough pairs") {
  const auto s = series_of({3, 5, 4}, {0.1, 0.2, 0.3});
  CHECK_THROWS_AS(fit(s, PopularityVariant::kBaseline), InsufficientData);
  const auto s4 = series_of({3, 5, 4, 7}, {0.1, 0.2, 0.3, 0.4});
  CHECK_NOTHROW(fit(s4, PopularityVariant::kBaseline));
  CHECK_THROWS_AS(fit(s4, PopularityVariant::kDensity), InsufficientData);
}

TEST_CASE("identity and vanishing density term") {
  const PopularityModel identity{PopularityVariant::kBaseline, {1.0, 0.0}, false};
  CHECK(identity.predict({0, 41, 0.3}) == doctest::Approx(std::log(42.0)));
  const PopularityModel base{PopularityVariant::kBaseline, {0.7, 0.9}, false};
  const PopularityModel dens{PopularityVariant::kDensity, {0.7, 0.0, 0.9}, false};
  for (double d : {-1.0, 0.0, 0.4}) CHECK(dens.predict({0, 12, d}) == base.predict({0, 12, d}));
}

TEST_CASE("zero intensities fall back to the baseline") {
  Rng rng(5);
  std::vector<std::size_t> counts;
  for (int i = 0; i < 40; ++i) counts.push_back(5 + rng.below(30));
  const auto s = series_of(counts, std::vector<double>(40, 0.0));
  const auto d = fit(s, PopularityVariant::kDensity);
  const auto b = fit(s, PopularityVariant::kBaseline);
  CHECK(d.rank_deficient);
  CHECK(d.coefficients[1] == 0.0);
  const auto fd = forecast(d, s), fb = forecast(b, s);
  for (std::size_t i = 0; i < fd.size(); ++i) {
    CHECK(fd[i].predicted == doctest::Approx(fb[i].predicted).epsilon(1e-10));
  }
}

TEST_CASE("start timestamp does not matter") {
  Rng rng(6);
  std::vector<Post> posts;
  std::map<std::size_t, double> inten;
  for (std::size_t id = 0; id < 400; ++id) {
    posts.push_back(at_hour(id, rng.uniform(0.0, 80.0)));
    inten[id] = rng.uniform(-1.0, 1.0);
  }
  auto shifted = posts;
  for (auto& p : shifted) p.timestamp += 86400 * 365 + 17;
  const auto a = build_series(posts, inten);
  const auto b = build_series(shifted, inten);
  CHECK(a.buckets == b.buckets);
  const auto ra = fit_and_evaluate(a, PopularityVariant::kDensity);
  const auto rb = fit_and_evaluate(b, PopularityVariant::kDensity);
  CHECK(ra.metrics.rmse == rb.metrics.rmse);
}

TEST_CASE("chronological split") {
  CHECK(chronological_split(10, 0.8) == 8);
  CHECK(chronological_split(11, 0.8) == 8);
  CHECK_THROWS_AS(chronological_split(5, 0.0), std::invalid_argument);
  const auto s = series_of({3, 5, 4, 7, 6, 8, 9, 7, 6, 5}, std::vector<double>(10, 0.0));
  const auto r = fit_and_evaluate(s, PopularityVariant::kBaseline);
  CHECK(r.metrics.n_test == 2);
  CHECK(r.test_points.front().t_index == 8);
  CHECK_THROWS_AS(evaluate(r.model, s, 0.95), InsufficientData);
}
