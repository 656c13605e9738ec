#pragma once

// Hand-built data shared by the unit and acceptance tests.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "complaintscale/scoring.hpp"
#include "complaintscale/tuples.hpp"

namespace fixtures {

// Six tuples over posts 0..7, three judgments each. Every post is in three
// tuples, so it has 9 appearances under per-judgment counting.
inline std::vector<cscale::Tuple4> six_tuples() {
  return {{0, {0, 1, 2, 3}}, {1, {4, 5, 6, 7}}, {2, {0, 2, 4, 6}},
          {3, {1, 3, 5, 7}}, {4, {0, 1, 4, 5}}, {5, {2, 3, 6, 7}}};
}

inline std::vector<cscale::Judgment> eighteen_judgments() {
  const std::array<std::array<std::size_t, 3>, 18> rows = {{
      {0, 0, 3}, {0, 0, 3}, {0, 1, 3},  //
      {1, 4, 7}, {1, 5, 7}, {1, 4, 6},  //
      {2, 0, 6}, {2, 0, 6}, {2, 4, 2},  //
      {3, 1, 7}, {3, 5, 7}, {3, 1, 3},  //
      {4, 0, 5}, {4, 4, 5}, {4, 0, 1},  //
      {5, 2, 7}, {5, 6, 7}, {5, 2, 3},
  }};
  std::vector<cscale::Judgment> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    cscale::Judgment j;
    j.tuple_id = rows[i][0];
    j.annotator_id = "a" + std::to_string(i % 3);
    j.best_post_id = rows[i][1];
    j.worst_post_id = rows[i][2];
    out.push_back(j);
  }
  return out;
}

struct Expected {
  std::size_t n_best, n_worst, n_appearances;
  double score;
};

// Counted by hand from the rows above.
inline std::array<Expected, 8> per_judgment_expected() {
  return {{{6, 0, 9, 6.0 / 9},
           {3, 1, 9, 2.0 / 9},
           {2, 1, 9, 1.0 / 9},
           {0, 5, 9, -5.0 / 9},
           {4, 0, 9, 4.0 / 9},
           {2, 2, 9, 0.0},
           {1, 3, 9, -2.0 / 9},
           {0, 6, 9, -6.0 / 9}}};
}

// One majority best and worst per tuple; three appearances per post.
inline std::array<Expected, 8> majority_expected() {
  return {{{3, 0, 3, 1.0},
           {1, 0, 3, 1.0 / 3},
           {1, 0, 3, 1.0 / 3},
           {0, 1, 3, -1.0 / 3},
           {1, 0, 3, 1.0 / 3},
           {0, 1, 3, -1.0 / 3},
           {0, 1, 3, -1.0 / 3},
           {0, 3, 3, -1.0}}};
}

// Post 0 sits in eight single-judgment tuples: best six times, worst once.
inline void six_one_eight(std::vector<cscale::Tuple4>& tuples,
                          std::vector<cscale::Judgment>& judgments) {
  tuples.clear();
  judgments.clear();
  for (std::size_t k = 0; k < 8; ++k) {
    const std::size_t a = 1 + 3 * k, b = a + 1, c = a + 2;
    tuples.push_back({k, {0, a, b, c}});
    cscale::Judgment j;
    j.tuple_id = k;
    j.annotator_id = "solo";
    if (k < 6) {
      j.best_post_id = 0;
      j.worst_post_id = a;
    } else if (k == 6) {
      j.best_post_id = a;
      j.worst_post_id = 0;
    } else {
      j.best_post_id = a;
      j.worst_post_id = b;
    }
    judgments.push_back(j);
  }
}

}  // namespace fixtures
