#include "complaintscale/reliability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "complaintscale/error.hpp"
#include "complaintscale/metrics.hpp"
#include "complaintscale/rng.hpp"

namespace cscale {

namespace {

struct JudgedTuple {
  Tuple4 tuple;
  std::vector<Judgment> judgments;
};

struct RepeatOutcome {
  std::optional<double> r;
  std::size_t n_posts = 0;
};

ScoreTable score_half(std::span<const JudgedTuple* const> half, CountingMode mode) {
  std::vector<Tuple4> tuples;
  std::vector<Judgment> judgments;
  tuples.reserve(half.size());
  for (const auto* jt : half) {
    tuples.push_back(jt->tuple);
    judgments.insert(judgments.end(), jt->judgments.begin(), jt->judgments.end());
  }
  return aggregate_scores(tuples, judgments, mode);
}

RepeatOutcome run_repeat(const std::vector<JudgedTuple>& judged, std::size_t repeat,
                         const ShrOptions& options) {
  std::vector<const JudgedTuple*> order;
  order.reserve(judged.size());
  for (const auto& jt : judged) order.push_back(&jt);

  std::span<const JudgedTuple* const> first, second;
  if (options.mode == SplitMode::kMirrored) {
    first = order;
    second = order;
  } else {
    Rng rng(derive_seed(options.seed, repeat));
    rng.shuffle(std::span(order));
    const std::size_t mid = order.size() / 2;
    first = std::span(order).first(mid);
    second = std::span(order).subspan(mid);
  }
  const ScoreTable a = score_half(first, options.counting);
  const ScoreTable b = score_half(second, options.counting);

  std::vector<double> xs, ys;
  std::size_t ia = 0, ib = 0;
  while (ia < a.scores.size() && ib < b.scores.size()) {
    if (a.scores[ia].post_id < b.scores[ib].post_id) {
      ++ia;
    } else if (b.scores[ib].post_id < a.scores[ia].post_id) {
      ++ib;
    } else {
      xs.push_back(a.scores[ia++].score);
      ys.push_back(b.scores[ib++].score);
    }
  }
  RepeatOutcome out;
  out.n_posts = xs.size();
  if (xs.size() < 3) return out;
  try {
    out.r = metrics::pearson(xs, ys);
  } catch (const ZeroVariance&) {
  }
  return out;
}

}  // namespace

ShrResult split_half_reliability(std::span<const Tuple4> tuples,
                                 std::span<const Judgment> judgments,
                                 const ShrOptions& options) {
  if (options.repeats == 0) throw std::invalid_argument("repeats must be >= 1");

  std::unordered_map<std::size_t, std::size_t> index;
  std::vector<JudgedTuple> all;
  all.reserve(tuples.size());
  for (const auto& t : tuples) {
    index[t.id] = all.size();
    all.push_back({t, {}});
  }
  for (const auto& j : judgments) {
    auto it = index.find(j.tuple_id);
    if (it == index.end()) {
      throw InvalidJudgment("judgment references unknown tuple " +
                            std::to_string(j.tuple_id));
    }
    all[it->second].judgments.push_back(j);
  }
  std::vector<JudgedTuple> judged;
  for (auto& jt : all) {
    if (!jt.judgments.empty()) judged.push_back(std::move(jt));
  }

  std::vector<RepeatOutcome> outcomes(options.repeats);
  unsigned threads = options.threads ? options.threads
                                     : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, options.repeats));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < options.repeats; r = next++) {
      outcomes[r] = run_repeat(judged, r, options);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  ShrResult result;
  std::vector<double> rs;
  result.n_posts_used = SIZE_MAX;
  for (const auto& o : outcomes) {
    if (!o.r) {
      ++result.n_degenerate;
      continue;
    }
    rs.push_back(*o.r);
    result.n_posts_used = std::min(result.n_posts_used, o.n_posts);
  }
  if (rs.empty()) {
    throw DegenerateSplit("all " + std::to_string(options.repeats) +
                          " split-half repeats were degenerate");
  }
  result.repeats = rs.size();
  result.mean_r = metrics::mean(rs);
  if (rs.size() > 1) {
    double ss = 0.0;
    for (double r : rs) ss += (r - result.mean_r) * (r - result.mean_r);
    result.std_r = std::sqrt(ss / static_cast<double>(rs.size() - 1));
  }
  return result;
}

std::vector<Judgment> simulate_judgments(std::span<const double> latent,
                                         std::span<const Tuple4> tuples,
                                         std::size_t annotators_per_tuple,
                                         double noise_sigma, std::uint64_t seed) {
  if (noise_sigma < 0.0) throw std::invalid_argument("noise_sigma must be >= 0");
  Rng rng(seed);
  std::vector<Judgment> out;
  out.reserve(tuples.size() * annotators_per_tuple);
  for (const auto& t : tuples) {
    std::array<std::size_t, 4> ids = t.post_ids;
    std::sort(ids.begin(), ids.end());
    for (auto p : ids) {
      if (p >= latent.size()) {
        throw std::invalid_argument("no latent score for post " + std::to_string(p));
      }
    }
    for (std::size_t k = 0; k < annotators_per_tuple; ++k) {
      std::array<double, 4> seen{};
      for (int i = 0; i < 4; ++i) {
        seen[i] = latent[ids[i]] + (noise_sigma > 0.0 ? rng.normal(0.0, noise_sigma) : 0.0);
      }
      // Strict comparisons over ascending ids keep the lower id on ties.
      int best = 0;
      for (int i = 1; i < 4; ++i) {
        if (seen[i] > seen[best]) best = i;
      }
      int worst = best == 0 ? 1 : 0;
      for (int i = 0; i < 4; ++i) {
        if (i != best && seen[i] < seen[worst]) worst = i;
      }
      Judgment j;
      j.tuple_id = t.id;
      j.annotator_id = "sim-" + std::to_string(k);
      j.best_post_id = ids[best];
      j.worst_post_id = ids[worst];
      out.push_back(std::move(j));
    }
  }
  return out;
}

}  // namespace cscale
