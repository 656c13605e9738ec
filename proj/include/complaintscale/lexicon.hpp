#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "complaintscale/corpus.hpp"
#include "complaintscale/scoring.hpp"

namespace cscale {

struct LexiconEntry {
  std::string word;
  double valence = 0.0;  // [-3, 3]
  double arousal = 0.0;  // [0, 4]
};

enum class Dimension { kHighValence, kLowValence, kHighArousal, kLowArousal };

inline constexpr std::array<Dimension, 4> kAllDimensions = {
    Dimension::kHighValence, Dimension::kLowValence, Dimension::kHighArousal,
    Dimension::kLowArousal};

std::string_view dimension_name(Dimension d);

// Strict thresholds: valence > 2, valence < -2, arousal > 3, arousal < 2.
bool in_dimension(const LexiconEntry& e, Dimension d);

// Valence for the two valence sets, arousal for the two arousal sets.
double dimension_score(const LexiconEntry& e, Dimension d);

struct DimensionSets {
  std::set<std::string> high_valence;
  std::set<std::string> low_valence;
  std::set<std::string> high_arousal;
  std::set<std::string> low_arousal;

  const std::set<std::string>& get(Dimension d) const;
};

class Lexicon {
 public:
  // Validates ranges (RangeError) and uniqueness (ParseError).
  explicit Lexicon(std::vector<LexiconEntry> entries);

  const std::vector<LexiconEntry>& entries() const { return entries_; }
  const LexiconEntry* find(std::string_view word) const;
  DimensionSets dimension_sets() const;
  // Longest-match tokenizer over the lexicon's words.
  const Tokenizer& tokenizer() const { return tokenizer_; }

 private:
  std::vector<LexiconEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  Tokenizer tokenizer_;
};

// CSV with header "word,valence,arousal". Errors carry the 1-based line.
Lexicon parse_lexicon(std::istream& in);
Lexicon load_lexicon(const std::string& path);

// Mean dimension score over the tokens that fall in the dimension's set;
// nullopt when none do.
std::optional<double> post_dimension_mean(std::span<const std::string> tokens,
                                          Dimension d, const Lexicon& lexicon);
std::optional<double> post_dimension_mean(const Post& post, Dimension d,
                                          const Lexicon& lexicon);

struct DimensionCorrelation {
  Dimension dimension = Dimension::kHighValence;
  std::optional<double> r;   // nullopt: fewer than 3 posts or constant input
  std::size_t n_used = 0;
  std::size_t n_excluded = 0;  // posts with no token in the set

  // Throws InsufficientData when r is absent.
  double value() const;
};

// Pearson between per-post dimension means and intensity, per dimension.
// Posts without a matching token are excluded from that dimension only.
// Throws MissingIntensity if a post has no score.
std::array<DimensionCorrelation, 4> correlate_dimensions(
    std::span<const Post> posts, std::span<const IntensityScore> scores,
    const Lexicon& lexicon);

struct HistogramBin {
  double lo = 0.0, hi = 0.0;
  std::size_t count = 0;
  std::optional<double> mean_length;
};

struct DistributionReport {
  std::array<std::size_t, 5> bin_counts{};
  std::array<std::optional<double>, 5> bin_mean_length{};
  std::optional<double> mean_length_positive;  // score > 0
  std::optional<double> mean_length_negative;  // score < 0
  std::vector<HistogramBin> histogram;         // 20 bins of width 0.1

  int modal_bin() const;
};

DistributionReport distribution_report(std::span<const Post> posts,
                                       std::span<const IntensityScore> scores);

}  // namespace cscale
