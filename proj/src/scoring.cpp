#include "complaintscale/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "complaintscale/error.hpp"

namespace cscale {

namespace {

std::string describe(const Judgment& j) {
  return "judgment (tuple " + std::to_string(j.tuple_id) + ", annotator '" +
         j.annotator_id + "', best " + std::to_string(j.best_post_id) +
         ", worst " + std::to_string(j.worst_post_id) + ")";
}

bool in_tuple(const Tuple4& t, std::size_t post) {
  return std::find(t.post_ids.begin(), t.post_ids.end(), post) != t.post_ids.end();
}

struct Counts {
  std::size_t appearances = 0, best = 0, worst = 0;
};

// Majority pick among `votes`, ties to the lower post id, skipping `exclude`.
std::size_t majority(const std::map<std::size_t, std::size_t>& votes,
                     std::size_t exclude, bool use_exclude) {
  std::size_t winner = 0, top = 0;
  for (const auto& [post, n] : votes) {
    if (use_exclude && post == exclude) continue;
    if (n > top) {
      top = n;
      winner = post;
    }
  }
  return winner;
}

}  // namespace

void validate_judgment(const Tuple4& tuple, const Judgment& j) {
  if (j.best_post_id == j.worst_post_id) {
    throw InvalidJudgment(describe(j) + ": best and worst are the same post");
  }
  if (!in_tuple(tuple, j.best_post_id) || !in_tuple(tuple, j.worst_post_id)) {
    throw InvalidJudgment(describe(j) + ": pick is not a member of the tuple");
  }
}

ScoreTable aggregate_scores(std::span<const Tuple4> tuples,
                            std::span<const Judgment> judgments,
                            CountingMode mode) {
  std::unordered_map<std::size_t, const Tuple4*> by_id;
  by_id.reserve(tuples.size());
  for (const auto& t : tuples) by_id[t.id] = &t;

  std::map<std::size_t, Counts> counts;
  std::set<std::size_t> judged_tuples;

  auto lookup = [&](const Judgment& j) -> const Tuple4& {
    auto it = by_id.find(j.tuple_id);
    if (it == by_id.end()) throw InvalidJudgment(describe(j) + ": unknown tuple");
    validate_judgment(*it->second, j);
    return *it->second;
  };

  if (mode == CountingMode::kPerJudgment) {
    for (const auto& j : judgments) {
      const Tuple4& t = lookup(j);
      judged_tuples.insert(t.id);
      for (auto p : t.post_ids) ++counts[p].appearances;
      ++counts[j.best_post_id].best;
      ++counts[j.worst_post_id].worst;
    }
  } else {
    std::map<std::size_t, std::pair<std::map<std::size_t, std::size_t>,
                                    std::map<std::size_t, std::size_t>>>
        votes;
    for (const auto& j : judgments) {
      lookup(j);
      auto& [best, worst] = votes[j.tuple_id];
      ++best[j.best_post_id];
      ++worst[j.worst_post_id];
    }
    for (const auto& [tid, v] : votes) {
      const Tuple4& t = *by_id.at(tid);
      judged_tuples.insert(tid);
      for (auto p : t.post_ids) ++counts[p].appearances;
      const std::size_t best = majority(v.first, 0, false);
      ++counts[best].best;
      ++counts[majority(v.second, best, true)].worst;
    }
  }

  ScoreTable table;
  table.scores.reserve(counts.size());
  for (const auto& [post, c] : counts) {
    IntensityScore s;
    s.post_id = post;
    s.n_appearances = c.appearances;
    s.n_best = c.best;
    s.n_worst = c.worst;
    s.score = (static_cast<double>(c.best) - static_cast<double>(c.worst)) /
              static_cast<double>(c.appearances);
    table.scores.push_back(s);
  }
  std::set<std::size_t> unjudged;
  for (const auto& t : tuples) {
    for (auto p : t.post_ids) {
      if (!counts.contains(p)) unjudged.insert(p);
    }
  }
  table.unjudged_posts.assign(unjudged.begin(), unjudged.end());
  return table;
}

int bin_score(double score) {
  if (!(score >= -1.0 && score <= 1.0)) {
    throw RangeError("score " + std::to_string(score) + " outside [-1, 1]");
  }
  if (score < -0.6) return 1;
  if (score < -0.2) return 2;
  if (score < 0.2) return 3;
  if (score < 0.6) return 4;
  return 5;
}

double gold_accuracy(std::span<const Judgment> judgments, const GoldMap& gold) {
  std::size_t judged = 0, correct = 0;
  for (const auto& j : judgments) {
    auto it = gold.find(j.tuple_id);
    if (it == gold.end()) continue;
    ++judged;
    correct += j.best_post_id == it->second.best_post_id;
    correct += j.worst_post_id == it->second.worst_post_id;
  }
  if (judged == 0) throw NoGoldOverlap("annotator judged no gold tuples");
  return static_cast<double>(correct) / static_cast<double>(2 * judged);
}

ProfileSet profile_annotators(std::span<const Judgment> judgments,
                              const GoldMap& gold, double threshold) {
  std::map<std::string, std::vector<Judgment>> by_annotator;
  for (const auto& j : judgments) by_annotator[j.annotator_id].push_back(j);
  ProfileSet set;
  for (const auto& [id, js] : by_annotator) {
    AnnotatorProfile p;
    p.annotator_id = id;
    try {
      p.gold_accuracy = gold_accuracy(js, gold);
    } catch (const NoGoldOverlap&) {
      set.unscreened.push_back(id);
      continue;
    }
    p.gold_judged = static_cast<std::size_t>(
        std::count_if(js.begin(), js.end(),
                      [&](const Judgment& j) { return gold.contains(j.tuple_id); }));
    p.status = p.gold_accuracy < threshold ? AnnotatorStatus::kRejected
                                           : AnnotatorStatus::kActive;
    set.profiles.push_back(std::move(p));
  }
  return set;
}

AnnotatorPartition filter_annotators(std::span<const AnnotatorProfile> profiles,
                                     double threshold) {
  AnnotatorPartition part;
  for (auto p : profiles) {
    if (p.gold_accuracy < threshold) {
      p.status = AnnotatorStatus::kRejected;
      part.rejected.push_back(std::move(p));
    } else {
      p.status = AnnotatorStatus::kActive;
      part.active.push_back(std::move(p));
    }
  }
  return part;
}

std::vector<Judgment> screen_judgments(std::span<const Judgment> judgments,
                                       const GoldMap& gold,
                                       const std::set<std::string>& rejected) {
  std::vector<Judgment> out;
  out.reserve(judgments.size());
  for (const auto& j : judgments) {
    if (gold.contains(j.tuple_id) || rejected.contains(j.annotator_id)) continue;
    out.push_back(j);
  }
  return out;
}

}  // namespace cscale
