#include "complaintscale/tuples.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "complaintscale/error.hpp"
#include "complaintscale/rng.hpp"

namespace cscale {

namespace {

using Quad = std::array<std::uint32_t, 4>;

Quad sorted(Quad q) {
  std::sort(q.begin(), q.end());
  return q;
}

struct QuadHash {
  std::size_t operator()(const Quad& q) const {
    std::uint64_t h = 0;
    for (auto v : q) h = splitmix64(h ^ v);
    return static_cast<std::size_t>(h);
  }
};

std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

int within_dups(const Quad& q) {
  Quad s = sorted(q);
  int d = 0;
  for (int i = 1; i < 4; ++i) d += s[i] == s[i - 1];
  return d;
}

bool contains(const Quad& q, std::uint32_t v) {
  return std::find(q.begin(), q.end(), v) != q.end();
}

std::uint64_t n_pairs(std::uint64_t n) { return n * (n - 1) / 2; }

// Mutable design state. Item balance holds by construction (the slot pool
// has every item exactly 4m times and swaps never change the multiset);
// phase one removes within-tuple and between-tuple duplicates, phase two
// spreads pair co-occurrence.
class Builder {
 public:
  Builder(const DesignConfig& config, std::uint64_t seed)
      : n_(config.n), target_(config.max_pair_spread), rng_(seed) {
    const std::size_t per_item = 4 * config.multiplier;
    std::vector<std::uint32_t> pool;
    pool.reserve(n_ * per_item);
    for (std::size_t i = 0; i < n_; ++i) {
      pool.insert(pool.end(), per_item, static_cast<std::uint32_t>(i));
    }
    rng_.shuffle(std::span(pool));
    tuples_.resize(pool.size() / 4);
    for (std::size_t t = 0; t < tuples_.size(); ++t) {
      for (int k = 0; k < 4; ++k) tuples_[t][k] = pool[4 * t + k];
      ++keys_[sorted(tuples_[t])];
    }
  }

  // Phase one. Returns false if the budget ran out before every tuple was
  // duplicate-free.
  bool repair(std::size_t budget) {
    long total = 0;
    for (const auto& q : tuples_) total += within_dups(q);
    for (const auto& [k, c] : keys_) total += c - 1;

    const std::size_t T = tuples_.size();
    while (total > 0 && budget-- > 0) {
      const std::size_t i = pick_bad();
      const std::size_t j = rng_.below(T);
      if (i == j) continue;
      std::size_t p = rng_.below(4);
      if (within_dups(tuples_[i]) > 0) {
        // Move a repeated value out of the tuple.
        for (int a = 0; a < 4; ++a) {
          for (int b = a + 1; b < 4; ++b) {
            if (tuples_[i][a] == tuples_[i][b]) p = b;
          }
        }
      }
      const std::size_t q = rng_.below(4);
      if (tuples_[i][p] == tuples_[j][q]) continue;

      const long before = within_dups(tuples_[i]) + within_dups(tuples_[j]) +
                          remove_key(tuples_[i]) + remove_key(tuples_[j]);
      std::swap(tuples_[i][p], tuples_[j][q]);
      const long after = within_dups(tuples_[i]) + within_dups(tuples_[j]) +
                         add_key(tuples_[i]) + add_key(tuples_[j]);
      const long delta = after - before;
      if (delta < 0 || (delta == 0 && rng_.below(2) == 0)) {
        total += delta;
      } else {
        remove_key(tuples_[i]);
        remove_key(tuples_[j]);
        std::swap(tuples_[i][p], tuples_[j][q]);
        add_key(tuples_[i]);
        add_key(tuples_[j]);
      }
    }
    return total == 0;
  }

  // Phase two: swap descent on (pair excess above target, sum of squared
  // pair counts), lexicographically.
  void balance_pairs(std::size_t budget) {
    occurrences_.assign(n_, {});
    for (std::size_t t = 0; t < tuples_.size(); ++t) {
      for (auto v : tuples_[t]) occurrences_[v].push_back(static_cast<std::uint32_t>(t));
      long dc = 0, de = 0;
      update_pairs(tuples_[t], +1, dc, de);
    }
    const std::size_t T = tuples_.size();
    while (!violators_.empty() && budget-- > 0) {
      auto it = violators_.begin();
      std::advance(it, static_cast<long>(rng_.below(violators_.size())));
      const auto u = static_cast<std::uint32_t>(*it >> 32);
      const auto v = static_cast<std::uint32_t>(*it & 0xFFFFFFFFu);

      std::vector<std::uint32_t> holders;
      for (auto t : occurrences_[u]) {
        if (contains(tuples_[t], v)) holders.push_back(t);
      }
      const std::size_t i = holders[rng_.below(holders.size())];
      const std::uint32_t x = rng_.below(2) ? u : v;
      const std::size_t p = static_cast<std::size_t>(
          std::find(tuples_[i].begin(), tuples_[i].end(), x) - tuples_[i].begin());
      const std::size_t j = rng_.below(T);
      const std::size_t q = rng_.below(4);
      const std::uint32_t y = tuples_[j][q];
      if (i == j || x == y || contains(tuples_[i], y) || contains(tuples_[j], x)) {
        continue;
      }
      Quad ni = tuples_[i], nj = tuples_[j];
      ni[p] = y;
      nj[q] = x;
      if (keys_.contains(sorted(ni)) || keys_.contains(sorted(nj))) continue;

      long dcost = 0, dexcess = 0;
      update_pairs(tuples_[i], -1, dcost, dexcess);
      update_pairs(tuples_[j], -1, dcost, dexcess);
      update_pairs(ni, +1, dcost, dexcess);
      update_pairs(nj, +1, dcost, dexcess);
      if (dexcess < 0 || (dexcess == 0 && dcost < 0)) {
        remove_key(tuples_[i]);
        remove_key(tuples_[j]);
        tuples_[i] = ni;
        tuples_[j] = nj;
        add_key(ni);
        add_key(nj);
        std::replace(occurrences_[x].begin(), occurrences_[x].end(),
                     static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
        std::replace(occurrences_[y].begin(), occurrences_[y].end(),
                     static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(i));
      } else {
        update_pairs(ni, -1, dcost, dexcess);
        update_pairs(nj, -1, dcost, dexcess);
        update_pairs(tuples_[i], +1, dcost, dexcess);
        update_pairs(tuples_[j], +1, dcost, dexcess);
      }
    }
  }

  Design finish(std::size_t multiplier) const {
    Design d;
    d.tuples.reserve(tuples_.size());
    for (std::size_t t = 0; t < tuples_.size(); ++t) {
      const Quad s = sorted(tuples_[t]);
      Tuple4 out;
      out.id = t;
      for (int k = 0; k < 4; ++k) out.post_ids[k] = s[k];
      d.tuples.push_back(out);
    }
    d.stats.item_count_min = 4 * multiplier;
    d.stats.item_count_max = 4 * multiplier;
    std::size_t nonzero = 0;
    for (const auto& [key, c] : pairs_) {
      if (c == 0) continue;
      ++d.stats.pair_count_histogram[c];
      d.stats.pair_count_max = std::max<std::size_t>(d.stats.pair_count_max, c);
      ++nonzero;
    }
    const std::size_t zeros = n_pairs(n_) - nonzero;
    if (zeros > 0) d.stats.pair_count_histogram[0] = zeros;
    return d;
  }

 private:
  std::size_t pick_bad() {
    while (true) {
      if (bad_.empty()) {
        for (std::size_t t = 0; t < tuples_.size(); ++t) {
          if (is_bad(t)) bad_.push_back(t);
        }
        if (bad_.empty()) return 0;
      }
      const std::size_t k = rng_.below(bad_.size());
      const std::size_t t = bad_[k];
      if (is_bad(t)) return t;
      bad_[k] = bad_.back();
      bad_.pop_back();
    }
  }

  bool is_bad(std::size_t t) const {
    return within_dups(tuples_[t]) > 0 || keys_.at(sorted(tuples_[t])) > 1;
  }

  // Returns the number of collisions the key contributed before removal.
  long remove_key(const Quad& q) {
    auto it = keys_.find(sorted(q));
    const long collision = it->second > 1 ? 1 : 0;
    if (--it->second == 0) keys_.erase(it);
    return collision;
  }

  // Returns the number of collisions the key contributes after insertion.
  long add_key(const Quad& q) {
    const long c = ++keys_[sorted(q)];
    return c > 1 ? 1 : 0;
  }

  void update_pairs(const Quad& q, int sign, long& dcost, long& dexcess) {
    for (int a = 0; a < 4; ++a) {
      for (int b = a + 1; b < 4; ++b) {
        const std::uint64_t key = pair_key(q[a], q[b]);
        auto& c = pairs_[key];
        const long old_c = c;
        const long new_c = old_c + sign;
        c = static_cast<std::uint32_t>(new_c);
        dcost += new_c * new_c - old_c * old_c;
        const long t = static_cast<long>(target_);
        dexcess += std::max(0L, new_c - t) - std::max(0L, old_c - t);
        if (new_c > t) {
          violators_.insert(key);
        } else {
          violators_.erase(key);
        }
      }
    }
  }

  std::size_t n_;
  std::size_t target_;
  Rng rng_;
  std::vector<Quad> tuples_;
  std::unordered_map<Quad, int, QuadHash> keys_;
  std::vector<std::size_t> bad_;
  std::unordered_map<std::uint64_t, std::uint32_t> pairs_;
  std::set<std::uint64_t> violators_;
  std::vector<std::vector<std::uint32_t>> occurrences_;
};

constexpr int kMaxAttempts = 32;

}  // namespace

std::uint64_t choose4(std::uint64_t n) {
  if (n < 4) return 0;
  if (n > (std::uint64_t{1} << 20)) return std::numeric_limits<std::uint64_t>::max();
  // n(n-1)(n-2)(n-3)/24 with 128-bit intermediates.
  __extension__ using u128 = unsigned __int128;
  u128 v = static_cast<u128>(n) * (n - 1) / 2;
  v = v * (n - 2) / 3;
  v = v * (n - 3) / 4;
  if (v > static_cast<u128>(std::numeric_limits<std::uint64_t>::max())) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(v);
}

Design design_tuples(const DesignConfig& config) {
  if (config.multiplier < 1) {
    throw InfeasibleDesign("multiplier must be at least 1");
  }
  if (config.n > std::numeric_limits<std::uint32_t>::max()) {
    throw InfeasibleDesign("corpus too large for tuple design");
  }
  const std::uint64_t needed =
      static_cast<std::uint64_t>(config.multiplier) * config.n;
  if (choose4(config.n) < needed) {
    throw InfeasibleDesign("C(" + std::to_string(config.n) + ", 4) = " +
                           std::to_string(choose4(config.n)) + " < " +
                           std::to_string(needed) + " tuples requested");
  }
  const std::size_t pair_budget =
      config.pair_swap_budget ? config.pair_swap_budget : 50 * config.n;
  const std::size_t repair_budget = 200 * needed + 10000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Builder builder(config, attempt == 0 ? config.seed
                                         : derive_seed(config.seed, attempt));
    if (!builder.repair(repair_budget)) continue;
    builder.balance_pairs(pair_budget);
    return builder.finish(config.multiplier);
  }
  throw InfeasibleDesign("no duplicate-free design found for n = " +
                         std::to_string(config.n) + " after " +
                         std::to_string(kMaxAttempts) + " attempts");
}

DesignCheck verify_design(std::span<const Tuple4> tuples, std::size_t n,
                          std::size_t max_pair_spread) {
  DesignCheck check;
  std::vector<std::size_t> item_counts(n, 0);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> pair_counts;
  std::map<std::array<std::size_t, 4>, std::vector<std::size_t>> by_key;
  std::set<std::size_t> seen_ids;

  for (const auto& t : tuples) {
    if (!seen_ids.insert(t.id).second) {
      check.violations.push_back({1, "tuple id " + std::to_string(t.id) + " used twice", {t.id}});
    }
    bool in_range = true;
    for (auto p : t.post_ids) {
      if (p >= n) {
        check.violations.push_back({0, "post id " + std::to_string(p) + " out of range", {t.id}});
        in_range = false;
      }
    }
    auto key = t.post_ids;
    std::sort(key.begin(), key.end());
    if (std::adjacent_find(key.begin(), key.end()) != key.end()) {
      check.violations.push_back({2, "repeated post within tuple " + std::to_string(t.id), {t.id}});
    }
    by_key[key].push_back(t.id);
    if (!in_range) continue;
    for (auto p : t.post_ids) ++item_counts[p];
    for (int a = 0; a < 4; ++a) {
      for (int b = a + 1; b < 4; ++b) {
        if (key[a] != key[b]) ++pair_counts[{key[a], key[b]}];
      }
    }
  }
  for (const auto& [key, ids] : by_key) {
    if (ids.size() > 1) {
      check.violations.push_back({1, "duplicate tuples", ids});
    }
  }

  if (n > 0) {
    const auto [lo, hi] = std::minmax_element(item_counts.begin(), item_counts.end());
    check.stats.item_count_min = *lo;
    check.stats.item_count_max = *hi;
    if (*hi - *lo > 1) {
      check.violations.push_back({3,
                                  "item appearance spread " + std::to_string(*hi - *lo) + " > 1",
                                  {}});
    }
  }
  for (const auto& [pair, c] : pair_counts) {
    ++check.stats.pair_count_histogram[c];
    check.stats.pair_count_max = std::max(check.stats.pair_count_max, c);
  }
  if (n >= 2) {
    const std::size_t zeros = n_pairs(n) - pair_counts.size();
    if (zeros > 0) check.stats.pair_count_histogram[0] = zeros;
  }
  if (check.stats.pair_count_max > max_pair_spread) {
    std::vector<std::size_t> offending;
    for (const auto& t : tuples) {
      auto key = t.post_ids;
      std::sort(key.begin(), key.end());
      bool hit = false;
      for (int a = 0; a < 4 && !hit; ++a) {
        for (int b = a + 1; b < 4 && !hit; ++b) {
          auto it = pair_counts.find({key[a], key[b]});
          hit = it != pair_counts.end() && it->second > max_pair_spread;
        }
      }
      if (hit) offending.push_back(t.id);
    }
    check.violations.push_back({4,
                                "pair co-occurrence " + std::to_string(check.stats.pair_count_max) +
                                    " exceeds " + std::to_string(max_pair_spread),
                                std::move(offending)});
  }
  return check;
}

}  // namespace cscale
