#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace cscale {

struct RawPost {
  std::string external_id;
  std::string text;
  std::string hashtag;
  std::int64_t timestamp = 0;  // UTC seconds
  std::optional<std::string> author;
};

struct Post {
  std::size_t id = 0;  // dense, 0..n-1, assigned at ingest
  std::string external_id;
  std::string text;
  std::string hashtag;
  std::int64_t timestamp = 0;
  std::size_t token_count = 0;  // hashtag spans excluded

  bool operator==(const Post&) const = default;
};

struct CleaningReport {
  std::size_t n_input = 0;
  std::size_t n_too_short = 0;
  std::size_t n_too_long = 0;
  std::size_t n_empty_after_clean = 0;
  std::size_t n_kept = 0;

  bool reconciles() const {
    return n_input == n_kept + n_too_short + n_too_long + n_empty_after_clean;
  }
  bool operator==(const CleaningReport&) const = default;
};

// Emoji or emoticon sequence -> textual token (without brackets).
using EmoticonTable = std::map<std::string, std::string>;

struct CleanedText {
  std::string text;
  std::vector<std::string> hashtags;  // contents of "#...#" spans, in order
};

// Strips URLs, "#...#" hashtag spans, location tags, @mentions and the
// author's name, replaces emoticons with "[token]" and collapses whitespace.
// Returns nullopt when nothing is left.
//
// Location tags are recognised in the forms Weibo exports them: a pin emoji
// (U+1F4CD) or "我在:"/"我在这里:" followed by a place name up to the next
// space, and the trailing "显示地图" link label.
std::optional<CleanedText> clean_post(const RawPost& raw,
                                      const EmoticonTable& emoticons);

enum class TokenizerMode { kCharacters, kLexiconLongestMatch };

class Tokenizer {
 public:
  static Tokenizer characters();
  static Tokenizer lexicon(const std::vector<std::string>& words);

  TokenizerMode mode() const { return mode_; }

  // Characters mode: one token per code point that is neither whitespace nor
  // punctuation. Lexicon mode: greedy longest match against the word list,
  // falling back to the same single code points.
  std::vector<std::string> tokenize(std::string_view text) const;

 private:
  Tokenizer() = default;
  TokenizerMode mode_ = TokenizerMode::kCharacters;
  std::unordered_set<std::string> words_;
  std::size_t max_word_cps_ = 0;
};

inline std::vector<std::string> tokenize(std::string_view text,
                                         const Tokenizer& tokenizer) {
  return tokenizer.tokenize(text);
}

struct FilterResult {
  std::vector<Post> posts;
  CleaningReport report;
};

// Keeps posts with min_tokens <= token_count <= max_tokens and renumbers the
// survivors densely in input order. Token counts must already be set.
FilterResult filter_corpus(std::vector<Post> posts, std::size_t min_tokens = 10,
                           std::size_t max_tokens = 200);

struct IngestOptions {
  EmoticonTable emoticons;
  std::size_t min_tokens = 10;
  std::size_t max_tokens = 200;
};

// clean_post + tokenize + filter_corpus over a raw batch.
FilterResult ingest(const std::vector<RawPost>& raw, const Tokenizer& tokenizer,
                    const IngestOptions& options);

// The small table shipped with the library; data/emoticons.json holds the
// same entries for the CLI.
EmoticonTable default_emoticons();

}  // namespace cscale
