#include "complaintscale/lexicon.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "complaintscale/error.hpp"
#include "complaintscale/metrics.hpp"

namespace cscale {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_double(std::string_view field, std::size_t line, const char* what) {
  field = trim(field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(std::string("cannot parse ") + what + " '" + std::string(field) + "'",
                     line);
  }
  return v;
}

std::unordered_map<std::size_t, double> score_index(std::span<const IntensityScore> scores) {
  std::unordered_map<std::size_t, double> out;
  for (const auto& s : scores) out[s.post_id] = s.score;
  return out;
}

double score_for(const std::unordered_map<std::size_t, double>& index, const Post& p) {
  auto it = index.find(p.id);
  if (it == index.end()) {
    throw MissingIntensity("no intensity score for post " + std::to_string(p.id));
  }
  return it->second;
}

}  // namespace

std::string_view dimension_name(Dimension d) {
  switch (d) {
    case Dimension::kHighValence: return "high_valence";
    case Dimension::kLowValence: return "low_valence";
    case Dimension::kHighArousal: return "high_arousal";
    case Dimension::kLowArousal: return "low_arousal";
  }
  return "unknown";
}

bool in_dimension(const LexiconEntry& e, Dimension d) {
  switch (d) {
    case Dimension::kHighValence: return e.valence > 2.0;
    case Dimension::kLowValence: return e.valence < -2.0;
    case Dimension::kHighArousal: return e.arousal > 3.0;
    case Dimension::kLowArousal: return e.arousal < 2.0;
  }
  return false;
}

double dimension_score(const LexiconEntry& e, Dimension d) {
  return d == Dimension::kHighValence || d == Dimension::kLowValence ? e.valence
                                                                      : e.arousal;
}

const std::set<std::string>& DimensionSets::get(Dimension d) const {
  switch (d) {
    case Dimension::kHighValence: return high_valence;
    case Dimension::kLowValence: return low_valence;
    case Dimension::kHighArousal: return high_arousal;
    case Dimension::kLowArousal: return low_arousal;
  }
  return high_valence;
}

Lexicon::Lexicon(std::vector<LexiconEntry> entries)
    : entries_(std::move(entries)), tokenizer_(Tokenizer::characters()) {
  std::vector<std::string> words;
  words.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.word.empty()) throw ParseError("empty lexicon word", i + 2);
    if (!(e.valence >= -3.0 && e.valence <= 3.0)) {
      throw RangeError("valence " + std::to_string(e.valence) + " of '" + e.word +
                       "' outside [-3, 3]");
    }
    if (!(e.arousal >= 0.0 && e.arousal <= 4.0)) {
      throw RangeError("arousal " + std::to_string(e.arousal) + " of '" + e.word +
                       "' outside [0, 4]");
    }
    if (!index_.emplace(e.word, i).second) {
      throw ParseError("duplicate lexicon word '" + e.word + "'", i + 2);
    }
    words.push_back(e.word);
  }
  tokenizer_ = Tokenizer::lexicon(words);
}

const LexiconEntry* Lexicon::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? nullptr : &entries_[it->second];
}

DimensionSets Lexicon::dimension_sets() const {
  DimensionSets sets;
  for (const auto& e : entries_) {
    if (in_dimension(e, Dimension::kHighValence)) sets.high_valence.insert(e.word);
    if (in_dimension(e, Dimension::kLowValence)) sets.low_valence.insert(e.word);
    if (in_dimension(e, Dimension::kHighArousal)) sets.high_arousal.insert(e.word);
    if (in_dimension(e, Dimension::kLowArousal)) sets.low_arousal.insert(e.word);
  }
  return sets;
}

Lexicon parse_lexicon(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<LexiconEntry> entries;
  std::unordered_map<std::string, std::size_t> seen;
  bool header = true;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (lineno == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    view = trim(view);
    if (view.empty()) continue;
    if (header) {
      if (view != "word,valence,arousal") {
        throw ParseError("expected header 'word,valence,arousal'", lineno);
      }
      header = false;
      continue;
    }
    const std::size_t c1 = view.find(',');
    const std::size_t c2 = c1 == std::string_view::npos ? c1 : view.find(',', c1 + 1);
    if (c2 == std::string_view::npos || view.find(',', c2 + 1) != std::string_view::npos) {
      throw ParseError("expected 3 comma-separated fields", lineno);
    }
    LexiconEntry e;
    e.word = std::string(trim(view.substr(0, c1)));
    e.valence = parse_double(view.substr(c1 + 1, c2 - c1 - 1), lineno, "valence");
    e.arousal = parse_double(view.substr(c2 + 1), lineno, "arousal");
    if (e.word.empty()) throw ParseError("empty word", lineno);
    if (!(e.valence >= -3.0 && e.valence <= 3.0)) {
      throw RangeError("valence out of [-3, 3] on line " + std::to_string(lineno));
    }
    if (!(e.arousal >= 0.0 && e.arousal <= 4.0)) {
      throw RangeError("arousal out of [0, 4] on line " + std::to_string(lineno));
    }
    if (!seen.emplace(e.word, lineno).second) {
      throw ParseError("duplicate word '" + e.word + "'", lineno);
    }
    entries.push_back(std::move(e));
  }
  if (header) throw ParseError("empty lexicon file", 0);
  return Lexicon(std::move(entries));
}

Lexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open lexicon '" + path + "'");
  return parse_lexicon(in);
}

std::optional<double> post_dimension_mean(std::span<const std::string> tokens,
                                          Dimension d, const Lexicon& lexicon) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& tok : tokens) {
    const LexiconEntry* e = lexicon.find(tok);
    if (!e || !in_dimension(*e, d)) continue;
    sum += dimension_score(*e, d);
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::optional<double> post_dimension_mean(const Post& post, Dimension d,
                                          const Lexicon& lexicon) {
  const auto tokens = lexicon.tokenizer().tokenize(post.text);
  return post_dimension_mean(tokens, d, lexicon);
}

double DimensionCorrelation::value() const {
  if (!r) {
    throw InsufficientData(std::string(dimension_name(dimension)) +
                           ": not enough posts with matching tokens (" +
                           std::to_string(n_used) + " used)");
  }
  return *r;
}

std::array<DimensionCorrelation, 4> correlate_dimensions(
    std::span<const Post> posts, std::span<const IntensityScore> scores,
    const Lexicon& lexicon) {
  const auto index = score_index(scores);
  std::array<std::vector<double>, 4> means, intensities;
  std::array<DimensionCorrelation, 4> out;
  for (std::size_t k = 0; k < 4; ++k) out[k].dimension = kAllDimensions[k];

  for (const auto& p : posts) {
    const double intensity = score_for(index, p);
    const auto tokens = lexicon.tokenizer().tokenize(p.text);
    for (std::size_t k = 0; k < 4; ++k) {
      const auto m = post_dimension_mean(tokens, kAllDimensions[k], lexicon);
      if (!m) {
        ++out[k].n_excluded;
        continue;
      }
      means[k].push_back(*m);
      intensities[k].push_back(intensity);
    }
  }
  for (std::size_t k = 0; k < 4; ++k) {
    out[k].n_used = means[k].size();
    if (means[k].size() < 3) continue;
    try {
      out[k].r = metrics::pearson(means[k], intensities[k]);
    } catch (const ZeroVariance&) {
    }
  }
  return out;
}

int DistributionReport::modal_bin() const {
  int best = 1;
  for (int b = 2; b <= 5; ++b) {
    if (bin_counts[b - 1] > bin_counts[best - 1]) best = b;
  }
  return best;
}

DistributionReport distribution_report(std::span<const Post> posts,
                                       std::span<const IntensityScore> scores) {
  const auto index = score_index(scores);
  DistributionReport report;
  std::array<double, 5> length_sum{};
  double pos_sum = 0.0, neg_sum = 0.0;
  std::size_t pos_n = 0, neg_n = 0;
  constexpr std::size_t kFine = 20;
  std::array<std::size_t, kFine> fine_count{};
  std::array<double, kFine> fine_len{};

  for (const auto& p : posts) {
    const double s = score_for(index, p);
    const int bin = bin_score(s);
    const auto len = static_cast<double>(p.token_count);
    ++report.bin_counts[bin - 1];
    length_sum[bin - 1] += len;
    if (s > 0) {
      pos_sum += len;
      ++pos_n;
    } else if (s < 0) {
      neg_sum += len;
      ++neg_n;
    }
    const auto f = std::min<std::size_t>(kFine - 1, static_cast<std::size_t>(std::floor(s * 10.0 + 10.0)));
    ++fine_count[f];
    fine_len[f] += len;
  }
  for (std::size_t b = 0; b < 5; ++b) {
    if (report.bin_counts[b]) {
      report.bin_mean_length[b] = length_sum[b] / static_cast<double>(report.bin_counts[b]);
    }
  }
  if (pos_n) report.mean_length_positive = pos_sum / static_cast<double>(pos_n);
  if (neg_n) report.mean_length_negative = neg_sum / static_cast<double>(neg_n);
  for (std::size_t f = 0; f < kFine; ++f) {
    HistogramBin h;
    h.lo = (static_cast<double>(f) - 10.0) / 10.0;
    h.hi = (static_cast<double>(f) - 9.0) / 10.0;
    h.count = fine_count[f];
    if (h.count) h.mean_length = fine_len[f] / static_cast<double>(h.count);
    report.histogram.push_back(h);
  }
  return report;
}

}  // namespace cscale
