#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace cscale {

// A best-worst item set. post_ids is the canonical identity: four distinct
// ids sorted ascending. The order annotators see is chosen separately.
struct Tuple4 {
  std::size_t id = 0;
  std::array<std::size_t, 4> post_ids{};

  bool operator==(const Tuple4&) const = default;
};

struct DesignConfig {
  std::size_t n = 0;           // corpus size
  std::size_t multiplier = 2;  // tuples per item; 2 gives 2n tuples
  std::uint64_t seed = 0;
  std::size_t max_pair_spread = 2;  // soft target for pair co-occurrence
  // Swap attempts spent on pair balancing; 0 means 50 * n.
  std::size_t pair_swap_budget = 0;
};

struct DesignStats {
  std::size_t item_count_min = 0;
  std::size_t item_count_max = 0;
  std::size_t pair_count_max = 0;
  // co-occurrence count -> number of unordered post pairs with that count,
  // including pairs that never co-occur (key 0).
  std::map<std::size_t, std::size_t> pair_count_histogram;

  bool operator==(const DesignStats&) const = default;
};

struct Design {
  std::vector<Tuple4> tuples;
  DesignStats stats;
};

// Number of 4-subsets of n items, saturating at UINT64_MAX.
std::uint64_t choose4(std::uint64_t n);

// Builds multiplier * n distinct tuples in which every post appears exactly
// 4 * multiplier times. Pair balance (pair_count_max <= max_pair_spread) is
// pursued by swap descent and reported, not guaranteed. Deterministic in the
// config. Throws InfeasibleDesign when C(n, 4) < multiplier * n.
Design design_tuples(const DesignConfig& config);

struct DesignViolation {
  // 0: post id out of range, 1: duplicate tuples, 2: repeated post within a
  // tuple, 3: item appearance spread above 1, 4: pair count above target.
  int criterion = 0;
  std::string message;
  std::vector<std::size_t> tuple_ids;
};

struct DesignCheck {
  DesignStats stats;
  std::vector<DesignViolation> violations;

  bool ok() const { return violations.empty(); }
};

// Recomputes every balance criterion from the tuple list alone.
DesignCheck verify_design(std::span<const Tuple4> tuples, std::size_t n,
                          std::size_t max_pair_spread = 2);

}  // namespace cscale
