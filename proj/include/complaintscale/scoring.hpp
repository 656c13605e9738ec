#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "complaintscale/tuples.hpp"

namespace cscale {

// One annotator's best/worst pick for one tuple.
struct Judgment {
  std::size_t tuple_id = 0;
  std::string annotator_id;
  std::size_t best_post_id = 0;
  std::size_t worst_post_id = 0;
  std::int64_t timestamp = 0;

  bool operator==(const Judgment&) const = default;
};

struct IntensityScore {
  std::size_t post_id = 0;
  std::size_t n_appearances = 0;
  std::size_t n_best = 0;
  std::size_t n_worst = 0;
  double score = 0.0;  // (n_best - n_worst) / n_appearances, in [-1, 1]

  bool operator==(const IntensityScore&) const = default;
};

enum class CountingMode {
  // Every judgment is one appearance of each of the tuple's four posts.
  kPerJudgment,
  // Judgments of a tuple are first reduced to one majority best and one
  // majority worst (ties to the lower post id); each tuple is one appearance.
  kPerTupleMajority,
};

struct ScoreTable {
  std::vector<IntensityScore> scores;       // sorted by post_id
  std::vector<std::size_t> unjudged_posts;  // in some tuple, never judged
};

// Throws InvalidJudgment if best == worst or either id is not in the tuple.
void validate_judgment(const Tuple4& tuple, const Judgment& judgment);

// Best-minus-worst counting. Judgments must already exclude gold tuples and
// rejected annotators. Throws InvalidJudgment for an unknown tuple id or a
// pick that does not belong to its tuple.
ScoreTable aggregate_scores(std::span<const Tuple4> tuples,
                            std::span<const Judgment> judgments,
                            CountingMode mode = CountingMode::kPerJudgment);

// Bins of width 0.4 over [-1, 1]: [-1,-0.6) -> 1, [-0.6,-0.2) -> 2,
// [-0.2,0.2) -> 3, [0.2,0.6) -> 4, [0.6,1] -> 5. Throws RangeError outside
// [-1, 1].
int bin_score(double score);

struct GoldAnswer {
  std::size_t best_post_id = 0;
  std::size_t worst_post_id = 0;
};

using GoldMap = std::map<std::size_t, GoldAnswer>;

// (correct best picks + correct worst picks) / (2 * gold judgments). Only
// judgments on gold tuples count. Throws NoGoldOverlap when there are none.
double gold_accuracy(std::span<const Judgment> judgments, const GoldMap& gold);

inline constexpr double kDefaultGoldThreshold = 0.70;

enum class AnnotatorStatus { kActive, kRejected };

struct AnnotatorProfile {
  std::string annotator_id;
  double gold_accuracy = 0.0;
  std::size_t gold_judged = 0;
  AnnotatorStatus status = AnnotatorStatus::kActive;

  bool operator==(const AnnotatorProfile&) const = default;
};

struct ProfileSet {
  std::vector<AnnotatorProfile> profiles;  // sorted by annotator id
  std::vector<std::string> unscreened;     // judged no gold tuple
};

// Groups judgments by annotator and scores each against the gold answers.
ProfileSet profile_annotators(std::span<const Judgment> judgments,
                              const GoldMap& gold,
                              double threshold = kDefaultGoldThreshold);

struct AnnotatorPartition {
  std::vector<AnnotatorProfile> active;
  std::vector<AnnotatorProfile> rejected;
};

// Rejects accuracy strictly below the threshold.
AnnotatorPartition filter_annotators(std::span<const AnnotatorProfile> profiles,
                                     double threshold = kDefaultGoldThreshold);

// Drops judgments on gold tuples and judgments by rejected annotators.
std::vector<Judgment> screen_judgments(std::span<const Judgment> judgments,
                                       const GoldMap& gold,
                                       const std::set<std::string>& rejected);

}  // namespace cscale
