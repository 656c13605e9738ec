#include <doctest.h>

#include <chrono>
#include <set>

#include "complaintscale/error.hpp"
#include "complaintscale/rng.hpp"
#include "complaintscale/tuples.hpp"

using namespace cscale;

TEST_CASE("choose4") {
  CHECK(choose4(3) == 0);
  CHECK(choose4(4) == 1);
  CHECK(choose4(5) == 5);
  CHECK(choose4(8) == 70);
  CHECK(choose4(100) == 3921225);
  CHECK(choose4(std::uint64_t{1} << 40) == UINT64_MAX);
}

TEST_CASE("eight posts give sixteen tuples of eight appearances") {
  const Design d = design_tuples({.n = 8, .seed = 1});
  CHECK(d.tuples.size() == 16);
  CHECK(d.stats.item_count_min == 8);
  CHECK(d.stats.item_count_max == 8);
  const DesignCheck check = verify_design(d.tuples, 8, 8);
  CHECK(check.ok());
  CHECK(check.stats == d.stats);
}

TEST_CASE("five posts cannot host ten distinct tuples") {
  CHECK_THROWS_AS(design_tuples({.n = 5}), InfeasibleDesign);
  CHECK_THROWS_AS(design_tuples({.n = 3}), InfeasibleDesign);
}

TEST_CASE("corpus-sized design") {
  const Design d = design_tuples({.n = 3103, .seed = 7});
  CHECK(d.tuples.size() == 6206);
  const DesignCheck check = verify_design(d.tuples, 3103);
  CHECK(check.ok());
  CHECK(check.stats.item_count_min == 8);
  CHECK(check.stats.item_count_max == 8);
}

TEST_CASE("verify_design names each violated criterion") {
  std::vector<Tuple4> ts{{0, {0, 1, 2, 3}}, {1, {0, 1, 2, 3}}};
  auto check = verify_design(ts, 4, 2);
  bool dup = false;
  for (const auto& v : check.violations) {
    if (v.criterion == 1) {
      dup = true;
      CHECK(v.tuple_ids == std::vector<std::size_t>{0, 1});
    }
  }
  CHECK(dup);

  ts = {{0, {0, 1, 1, 3}}};
  check = verify_design(ts, 4, 2);
  bool repeated = false;
  for (const auto& v : check.violations) repeated |= v.criterion == 2;
  CHECK(repeated);

  ts = {{0, {0, 1, 2, 9}}};
  check = verify_design(ts, 4, 2);
  bool range = false;
  for (const auto& v : check.violations) range |= v.criterion == 0;
  CHECK(range);

  ts = {{0, {0, 1, 2, 3}}, {1, {0, 1, 2, 4}}};
  check = verify_design(ts, 6, 2);
  bool spread = false;
  for (const auto& v : check.violations) spread |= v.criterion == 3;
  CHECK(spread);
}

TEST_CASE("design is deterministic in its seed") {
  const Design a = design_tuples({.n = 60, .seed = 9});
  const Design b = design_tuples({.n = 60, .seed = 9});
  const Design c = design_tuples({.n = 60, .seed = 10});
  CHECK(a.tuples == b.tuples);
  CHECK(a.tuples != c.tuples);
}

TEST_CASE("random sizes always satisfy the hard criteria") {
  Rng rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 6 + rng.below(495);
    const std::uint64_t seed = rng.below(1u << 30);
    CAPTURE(n);
    CAPTURE(seed);
    const Design d = design_tuples({.n = n, .seed = seed});
    CHECK(d.tuples.size() == 2 * n);
    const DesignCheck check = verify_design(d.tuples, n, SIZE_MAX);
    CHECK(check.ok());
    CHECK(check.stats.item_count_min == 8);
    CHECK(check.stats.item_count_max == 8);
    std::set<std::array<std::size_t, 4>> seen;
    for (std::size_t i = 0; i < d.tuples.size(); ++i) {
      const auto& t = d.tuples[i];
      CHECK(t.id == i);
      CHECK(std::is_sorted(t.post_ids.begin(), t.post_ids.end()));
      CHECK(std::adjacent_find(t.post_ids.begin(), t.post_ids.end()) == t.post_ids.end());
      seen.insert(t.post_ids);
    }
    CHECK(seen.size() == d.tuples.size());
  }
}

TEST_CASE("pair histogram accounts for every pair") {
  const std::size_t n = 40;
  const Design d = design_tuples({.n = n, .seed = 3});
  std::size_t pairs = 0, weighted = 0;
  for (const auto& [count, k] : d.stats.pair_count_histogram) {
    pairs += k;
    weighted += count * k;
  }
  CHECK(pairs == n * (n - 1) / 2);
  CHECK(weighted == d.tuples.size() * 6);
}
