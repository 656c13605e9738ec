#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "complaintscale/error.hpp"
#include "complaintscale/lexicon.hpp"
#include "complaintscale/metrics.hpp"
#include "complaintscale/rng.hpp"
#include "complaintscale/utf8.hpp"

using namespace cscale;

namespace {

Lexicon lex(const std::string& body) {
  std::istringstream in("word,valence,arousal\n" + body);
  return parse_lexicon(in);
}

Post make_post(std::size_t id, std::string text) {
  Post p;
  p.id = id;
  p.text = std::move(text);
  p.token_count = p.text.size();
  return p;
}

IntensityScore score_of(std::size_t id, double s) {
  IntensityScore sc;
  sc.post_id = id;
  sc.score = s;
  sc.n_appearances = 1;
  return sc;
}

}  // namespace

TEST_CASE("thresholds place words in dimension sets") {
  const Lexicon l = lex("糟糕,-2.5,3.4\n平静,0.5,1.0\n开心,2.5,2.5\n边界,2.0,3.0\n");
  const DimensionSets sets = l.dimension_sets();
  CHECK(sets.low_valence == std::set<std::string>{"糟糕"});
  CHECK(sets.high_arousal == std::set<std::string>{"糟糕"});
  CHECK(sets.low_arousal == std::set<std::string>{"平静"});
  CHECK(sets.high_valence == std::set<std::string>{"开心"});
  // Thresholds are strict: 2.0 and 3.0 belong to no set.
  const LexiconEntry* edge = l.find("边界");
  REQUIRE(edge != nullptr);
  for (Dimension d : kAllDimensions) CHECK_FALSE(in_dimension(*edge, d));
}

TEST_CASE("lexicon parse errors") {
  CHECK_THROWS_AS(lex("坏,4.0,1.0\n"), RangeError);
  CHECK_THROWS_AS(lex("坏,1.0,4.5\n"), RangeError);
  CHECK_THROWS_AS(lex("坏,abc,1.0\n"), ParseError);
  CHECK_THROWS_AS(lex("坏,1.0\n"), ParseError);
  CHECK_THROWS_AS(lex("坏,1.0,1.0\n坏,2.0,1.0\n"), ParseError);
  try {
    lex("好,1.0,1.0\n坏,x,1.0\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("post dimension mean") {
  const Lexicon l = lex("糟糕,-2.5,3.4\n可恶,-2.9,3.6\n平静,0.5,1.0\n");
  const std::vector<std::string> both{"糟糕", "x", "可恶"};
  CHECK(*post_dimension_mean(both, Dimension::kLowValence, l) == doctest::Approx(-2.7));
  const std::vector<std::string> none{"x", "y"};
  CHECK_FALSE(post_dimension_mean(none, Dimension::kLowValence, l).has_value());
  const std::vector<std::string> one{"平静"};
  CHECK(*post_dimension_mean(one, Dimension::kLowArousal, l) == 1.0);
  CHECK(*post_dimension_mean(make_post(0, "真糟糕啊可恶"), Dimension::kLowValence, l) ==
        doctest::Approx(-2.7));
}

TEST_CASE("dimension sets agree with thresholds on random lexicons") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<LexiconEntry> entries;
    for (int i = 0; i < 200; ++i) {
      entries.push_back({"w" + std::to_string(i), rng.uniform(-3.0, 3.0), rng.uniform(0.0, 4.0)});
    }
    const Lexicon l(entries);
    const DimensionSets sets = l.dimension_sets();
    for (const auto& e : l.entries()) {
      CHECK(sets.high_valence.count(e.word) == (e.valence > 2.0));
      CHECK(sets.low_valence.count(e.word) == (e.valence < -2.0));
      CHECK(sets.high_arousal.count(e.word) == (e.arousal > 3.0));
      CHECK(sets.low_arousal.count(e.word) == (e.arousal < 2.0));
    }
  }
}

TEST_CASE("constructed identity gives correlation one") {
  std::ostringstream csv;
  csv << "word,valence,arousal\n";
  const std::vector<std::string> words{"恨", "烦", "怒", "糟", "差", "坏"};
  const std::vector<double> valence{-2.1, -2.3, -2.5, -2.7, -2.9, -3.0};
  for (std::size_t i = 0; i < words.size(); ++i) csv << words[i] << ',' << valence[i] << ",2.5\n";
  std::istringstream in(csv.str());
  const Lexicon l = parse_lexicon(in);

  Rng rng(4);
  std::vector<Post> posts;
  std::vector<IntensityScore> scores;
  for (std::size_t id = 0; id < 100; ++id) {
    const auto a = rng.below(words.size()), b = rng.below(words.size());
    posts.push_back(make_post(id, "今天" + words[a] + "的天气" + words[b]));
    const double mean = (valence[a] + valence[b]) / 2;
    scores.push_back(score_of(id, -(mean + 2.0)));  // [-2, -3] -> [0, 1]
  }
  const auto result = correlate_dimensions(posts, scores, l);
  const auto& low = result[1];
  CHECK(low.dimension == Dimension::kLowValence);
  CHECK(std::abs(low.value()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(low.n_used == 100);
  CHECK_FALSE(result[0].r.has_value());
  CHECK(result[0].n_excluded == 100);
  CHECK_THROWS_AS(result[0].value(), InsufficientData);
}

TEST_CASE("independent intensity gives small correlations") {
  std::vector<LexiconEntry> entries;
  const std::u32string pool = U"甲乙丙丁戊己庚辛壬癸子丑寅卯辰巳午未申酉戌亥";
  Rng rng(2025);
  std::vector<std::string> words;
  for (char32_t cp : pool) {
    std::string w = utf8::encode(cp);
    words.push_back(w);
    entries.push_back({w, rng.uniform(-3.0, 3.0), rng.uniform(0.0, 4.0)});
  }
  const Lexicon l(entries);
  std::vector<Post> posts;
  std::vector<IntensityScore> scores;
  for (std::size_t id = 0; id < 1000; ++id) {
    std::string text;
    for (int k = 0; k < 12; ++k) text += words[rng.below(words.size())];
    posts.push_back(make_post(id, text));
    scores.push_back(score_of(id, rng.uniform(-1.0, 1.0)));
  }
  const auto result = correlate_dimensions(posts, scores, l);
  for (const auto& c : result) {
    CAPTURE(dimension_name(c.dimension));
    REQUIRE(c.r.has_value());
    CHECK(std::abs(*c.r) < 0.2);
  }

  auto reversed_posts = posts;
  std::reverse(reversed_posts.begin(), reversed_posts.end());
  const auto again = correlate_dimensions(reversed_posts, scores, l);
  for (std::size_t d = 0; d < 4; ++d) {
    CHECK(*again[d].r == doctest::Approx(*result[d].r).epsilon(1e-12));
  }
}

TEST_CASE("missing intensity is an error") {
  const Lexicon l = lex("糟糕,-2.5,3.4\n");
  const std::vector<Post> posts{make_post(0, "糟糕")};
  const std::vector<IntensityScore> scores;
  CHECK_THROWS_AS(correlate_dimensions(posts, scores, l), MissingIntensity);
}

TEST_CASE("distribution report") {
  std::vector<Post> posts{make_post(0, "a"), make_post(1, "b"), make_post(2, "c")};
  posts[0].token_count = 10;
  posts[1].token_count = 20;
  posts[2].token_count = 40;
  const std::vector<IntensityScore> zero{score_of(0, 0.0), score_of(1, 0.0), score_of(2, 0.0)};
  const auto flat = distribution_report(posts, zero);
  CHECK(flat.bin_counts == std::array<std::size_t, 5>{0, 0, 3, 0, 0});
  CHECK(flat.modal_bin() == 3);
  CHECK_FALSE(flat.mean_length_positive.has_value());

  const std::vector<Post> two(posts.begin(), posts.begin() + 2);
  const std::vector<IntensityScore> ends{score_of(0, -1.0), score_of(1, 1.0)};
  const auto r = distribution_report(two, ends);
  CHECK(*r.mean_length_negative == 10.0);
  CHECK(*r.mean_length_positive == 20.0);
  CHECK(r.bin_counts[0] == 1);
  CHECK(r.bin_counts[4] == 1);
  REQUIRE(r.histogram.size() == 20);
  CHECK(r.histogram.front().count == 1);
  CHECK(r.histogram.back().count == 1);
  CHECK(r.histogram.front().lo == -1.0);
  CHECK(r.histogram.back().hi == 1.0);

  const std::vector<IntensityScore> edge{score_of(0, -0.9), score_of(1, 0.1)};
  const auto e = distribution_report(two, edge);
  CHECK(e.histogram[1].count == 1);
  CHECK(e.histogram[11].count == 1);
}
