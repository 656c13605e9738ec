#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "complaintscale/scoring.hpp"
#include "complaintscale/tuples.hpp"

namespace cscale {

enum class SplitMode {
  kRandom,    // tuples (with all their judgments) randomly halved
  kMirrored,  // both halves receive the full tuple set; r is exactly 1
};

struct ShrOptions {
  std::size_t repeats = 100;
  std::uint64_t seed = 0;
  SplitMode mode = SplitMode::kRandom;
  CountingMode counting = CountingMode::kPerJudgment;
  // Worker threads for the repeats; 0 picks hardware concurrency. The result
  // does not depend on it.
  unsigned threads = 0;
};

struct ShrResult {
  double mean_r = 0.0;
  double std_r = 0.0;          // sample standard deviation over repeats
  std::size_t repeats = 0;     // repeats that produced a correlation
  std::size_t n_posts_used = 0;  // fewest posts correlated in any repeat
  std::size_t n_degenerate = 0;  // repeats discarded (< 3 shared posts or constant)
};

// Split-half reliability: per repeat, halve the judged tuples, score each
// half independently and correlate (Pearson) the posts scored in both.
// Tuples without judgments are ignored. Repeat r draws from a sub-seed of
// (seed, r), so threading does not change the result. Throws DegenerateSplit
// if every repeat is degenerate.
ShrResult split_half_reliability(std::span<const Tuple4> tuples,
                                 std::span<const Judgment> judgments,
                                 const ShrOptions& options);

// Simulated annotators: each perceives latent[post] + N(0, noise_sigma) for
// the four posts of a tuple and picks the maximum as best and, among the
// other three, the minimum as worst. Ties go to the lower post id. Annotator
// k of a tuple is named "sim-k".
std::vector<Judgment> simulate_judgments(std::span<const double> latent,
                                         std::span<const Tuple4> tuples,
                                         std::size_t annotators_per_tuple,
                                         double noise_sigma, std::uint64_t seed);

}  // namespace cscale
