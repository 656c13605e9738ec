#include "complaintscale/corpus.hpp"

#include <algorithm>
#include <utility>

#include "complaintscale/utf8.hpp"

namespace cscale {

namespace {

bool starts_with_at(std::string_view s, std::size_t pos, std::string_view prefix) {
  return s.substr(pos, prefix.size()) == prefix;
}

bool is_url_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  if (u >= 0x80) return false;
  if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9')) {
    return true;
  }
  return std::string_view("-._~:/?#[]@!$&'()*+,;=%").find(c) != std::string_view::npos;
}

std::string strip_urls(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t pos = 0; pos < s.size();) {
    if (starts_with_at(s, pos, "http://") || starts_with_at(s, pos, "https://") ||
        starts_with_at(s, pos, "www.")) {
      while (pos < s.size() && is_url_byte(s[pos])) ++pos;
      out.push_back(' ');
      continue;
    }
    out.push_back(s[pos++]);
  }
  return out;
}

std::string strip_hashtags(std::string_view s, std::vector<std::string>& tags) {
  std::string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t open = s.find('#', pos);
    if (open == std::string_view::npos) break;
    const std::size_t close = s.find('#', open + 1);
    if (close == std::string_view::npos) break;
    const std::string_view inner = s.substr(open + 1, close - open - 1);
    out.append(s.substr(pos, open - pos));
    if (!inner.empty() && inner.find('\n') == std::string_view::npos) {
      tags.emplace_back(inner);
      out.push_back(' ');
      pos = close + 1;
    } else {
      // "##" or a span crossing a line break is not a hashtag; keep the first
      // '#' and resume scanning at the second.
      out.push_back('#');
      pos = open + 1;
    }
  }
  out.append(s.substr(pos));
  return out;
}

// Removes `marker` and everything after it up to the next whitespace.
std::string strip_marked_runs(std::string_view s, std::string_view marker) {
  std::string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = s.find(marker, pos);
    if (hit == std::string_view::npos) break;
    out.append(s.substr(pos, hit - pos));
    const std::u32string rest = utf8::decode(s.substr(hit + marker.size()));
    std::size_t skip = marker.size();
    for (char32_t cp : rest) {
      if (utf8::is_space(cp)) break;
      skip += utf8::encode(cp).size();
    }
    out.push_back(' ');
    pos = hit + skip;
  }
  out.append(s.substr(pos));
  return out;
}

std::string strip_all(std::string_view s, std::string_view needle) {
  if (needle.empty()) return std::string(s);
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = s.find(needle, pos);
    if (hit == std::string_view::npos) break;
    out.append(s.substr(pos, hit - pos));
    out.push_back(' ');
    pos = hit + needle.size();
  }
  out.append(s.substr(pos));
  return out;
}

bool is_mention_char(char32_t cp) {
  if (cp == U'-' || cp == U'_') return true;
  return !utf8::is_space(cp) && !utf8::is_punct(cp);
}

std::string strip_mentions(std::string_view s) {
  const std::u32string cps = utf8::decode(s);
  std::u32string out;
  out.reserve(cps.size());
  for (std::size_t i = 0; i < cps.size();) {
    if (cps[i] == U'@' || cps[i] == 0xFF20) {
      std::size_t j = i + 1;
      while (j < cps.size() && is_mention_char(cps[j])) ++j;
      out.push_back(U' ');
      i = j;
      continue;
    }
    out.push_back(cps[i++]);
  }
  return utf8::encode(out);
}

std::string replace_emoticons(std::string_view s, const EmoticonTable& table) {
  if (table.empty()) return std::string(s);
  std::vector<const std::pair<const std::string, std::string>*> keys;
  for (const auto& kv : table) {
    if (!kv.first.empty()) keys.push_back(&kv);
  }
  // Longest key first so multi-code-point sequences win over their prefixes.
  std::stable_sort(keys.begin(), keys.end(), [](const auto* a, const auto* b) {
    return a->first.size() > b->first.size();
  });
  const std::vector<std::size_t> bounds = utf8::boundaries(s);
  std::string out;
  out.reserve(s.size());
  std::size_t b = 0;
  while (b + 1 < bounds.size()) {
    const std::size_t pos = bounds[b];
    const std::pair<const std::string, std::string>* match = nullptr;
    for (const auto* kv : keys) {
      if (starts_with_at(s, pos, kv->first)) {
        match = kv;
        break;
      }
    }
    if (match) {
      out += " [" + match->second + "] ";
      const std::size_t end = pos + match->first.size();
      while (b + 1 < bounds.size() && bounds[b] < end) ++b;
    } else {
      out.append(s.substr(pos, bounds[b + 1] - pos));
      ++b;
    }
  }
  return out;
}

std::string normalize_whitespace(std::string_view s) {
  const std::u32string cps = utf8::decode(s);
  std::u32string out;
  out.reserve(cps.size());
  bool pending_space = false;
  for (char32_t cp : cps) {
    if (utf8::is_space(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(cp);
  }
  return utf8::encode(out);
}

}  // namespace

std::optional<CleanedText> clean_post(const RawPost& raw,
                                      const EmoticonTable& emoticons) {
  CleanedText result;
  std::string s = strip_urls(raw.text);
  s = strip_hashtags(s, result.hashtags);
  s = strip_marked_runs(s, "\xF0\x9F\x93\x8D");  // U+1F4CD round pushpin
  for (std::string_view marker : {"我在这里:", "我在这里：", "我在:", "我在："}) {
    s = strip_marked_runs(s, marker);
  }
  s = strip_all(s, "显示地图");
  s = strip_mentions(s);
  if (raw.author && !raw.author->empty()) s = strip_all(s, *raw.author);
  s = replace_emoticons(s, emoticons);
  result.text = normalize_whitespace(s);
  if (result.text.empty()) return std::nullopt;
  return result;
}

Tokenizer Tokenizer::characters() { return Tokenizer(); }

Tokenizer Tokenizer::lexicon(const std::vector<std::string>& words) {
  Tokenizer t;
  t.mode_ = TokenizerMode::kLexiconLongestMatch;
  for (const auto& w : words) {
    if (w.empty()) continue;
    t.max_word_cps_ = std::max(t.max_word_cps_, utf8::decode(w).size());
    t.words_.insert(w);
  }
  return t;
}

std::vector<std::string> Tokenizer::tokenize(std::string_view text) const {
  std::vector<std::string> tokens;
  const std::vector<std::size_t> bounds = utf8::boundaries(text);
  const std::u32string cps = utf8::decode(text);
  const std::size_t n = cps.size();
  for (std::size_t i = 0; i < n;) {
    if (mode_ == TokenizerMode::kLexiconLongestMatch) {
      bool matched = false;
      for (std::size_t len = std::min(max_word_cps_, n - i); len >= 1; --len) {
        const std::string_view cand =
            text.substr(bounds[i], bounds[i + len] - bounds[i]);
        if (words_.contains(std::string(cand))) {
          tokens.emplace_back(cand);
          i += len;
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    if (!utf8::is_space(cps[i]) && !utf8::is_punct(cps[i])) {
      tokens.emplace_back(text.substr(bounds[i], bounds[i + 1] - bounds[i]));
    }
    ++i;
  }
  return tokens;
}

FilterResult filter_corpus(std::vector<Post> posts, std::size_t min_tokens,
                           std::size_t max_tokens) {
  FilterResult result;
  result.report.n_input = posts.size();
  for (auto& p : posts) {
    if (p.token_count < min_tokens) {
      ++result.report.n_too_short;
    } else if (p.token_count > max_tokens) {
      ++result.report.n_too_long;
    } else {
      p.id = result.posts.size();
      result.posts.push_back(std::move(p));
    }
  }
  result.report.n_kept = result.posts.size();
  return result;
}

FilterResult ingest(const std::vector<RawPost>& raw, const Tokenizer& tokenizer,
                    const IngestOptions& options) {
  std::vector<Post> cleaned;
  cleaned.reserve(raw.size());
  std::size_t n_empty = 0;
  for (const auto& r : raw) {
    auto c = clean_post(r, options.emoticons);
    if (!c) {
      ++n_empty;
      continue;
    }
    Post p;
    p.external_id = r.external_id;
    p.hashtag = !r.hashtag.empty() ? r.hashtag
                : c->hashtags.empty() ? std::string()
                                      : c->hashtags.front();
    p.timestamp = r.timestamp;
    p.token_count = tokenizer.tokenize(c->text).size();
    p.text = std::move(c->text);
    cleaned.push_back(std::move(p));
  }
  FilterResult result = filter_corpus(std::move(cleaned), options.min_tokens,
                                      options.max_tokens);
  result.report.n_input = raw.size();
  result.report.n_empty_after_clean = n_empty;
  return result;
}

EmoticonTable default_emoticons() {
  return {
      {"\xF0\x9F\x98\x82", "笑哭"},      // 😂
      {"\xF0\x9F\x98\xAD", "大哭"},      // 😭
      {"\xF0\x9F\x98\xA1", "愤怒"},      // 😡
      {"\xF0\x9F\x98\xA0", "生气"},      // 😠
      {"\xF0\x9F\x98\x8A", "微笑"},      // 😊
      {"\xF0\x9F\x98\x84", "开心"},      // 😄
      {"\xF0\x9F\x98\x93", "汗"},        // 😓
      {"\xF0\x9F\x98\x94", "失望"},      // 😔
      {"\xF0\x9F\x98\xA9", "累"},        // 😩
      {"\xF0\x9F\x99\x84", "白眼"},      // 🙄
      {"\xF0\x9F\x91\x8D", "赞"},        // 👍
      {"\xF0\x9F\x91\x8E", "踩"},        // 👎
      {"\xF0\x9F\x99\x8F", "拜托"},      // 🙏
      {"\xE2\x9D\xA4\xEF\xB8\x8F", "心"},  // ❤️
      {"\xE2\x9D\xA4", "心"},            // ❤
      {":)", "微笑"},
      {":(", "难过"},
      {":D", "大笑"},
  };
}

}  // namespace cscale
