#include <doctest.h>

#include <fstream>

#include "complaintscale/corpus.hpp"
#include "complaintscale/io.hpp"
#include "complaintscale/rng.hpp"
#include "complaintscale/utf8.hpp"

using namespace cscale;

namespace {

RawPost raw(std::string text, std::optional<std::string> author = std::nullopt) {
  RawPost r;
  r.external_id = "x";
  r.text = std::move(text);
  r.author = std::move(author);
  return r;
}

std::string cleaned(const std::string& text, const EmoticonTable& table = {}) {
  auto c = clean_post(raw(text), table);
  REQUIRE(c.has_value());
  return c->text;
}

Post post_with_tokens(std::size_t n) {
  Post p;
  p.external_id = "p" + std::to_string(n);
  p.text = std::string(n, 'a');
  p.token_count = n;
  return p;
}

}  // namespace

TEST_CASE("utf8 decode and encode round trip") {
  const std::string s = "a好\xF0\x9F\x98\x82z";
  const std::u32string cps = utf8::decode(s);
  CHECK(cps == U"a好😂z");
  CHECK(utf8::encode(cps) == s);
  CHECK(utf8::boundaries(s) == std::vector<std::size_t>{0, 1, 4, 8, 9});
}

TEST_CASE("utf8 malformed bytes become replacement characters") {
  const std::u32string cps = utf8::decode("a\xFF\xE5z");
  REQUIRE(cps.size() == 4);
  CHECK(cps[1] == 0xFFFD);
  CHECK(cps[2] == 0xFFFD);
  CHECK(cps[3] == U'z');
}

TEST_CASE("punctuation classes") {
  for (char32_t cp : {U',', U'!', U'，', U'。', U'！', U'？', U'“', U'…', U'、', U'【'}) {
    CHECK(utf8::is_punct(cp));
  }
  for (char32_t cp : {U'a', U'好', U'〇', U'々', U'9'}) CHECK_FALSE(utf8::is_punct(cp));
  CHECK(utf8::is_space(U'　'));
  CHECK(utf8::is_space(U'\t'));
}

TEST_CASE("clean_post strips a URL") { CHECK(cleaned("好累 http://t.cn/xyz") == "好累"); }

TEST_CASE("clean_post rejects text that is only a URL") {
  CHECK_FALSE(clean_post(raw("https://t.cn/abc?x=1#frag"), {}).has_value());
  CHECK_FALSE(clean_post(raw("   "), {}).has_value());
}

TEST_CASE("clean_post keeps hashtags as metadata only") {
  auto c = clean_post(raw("#代表建议让学生在校内完成家庭作业# 挺好的"), {});
  REQUIRE(c.has_value());
  CHECK(c->text == "挺好的");
  REQUIRE(c->hashtags.size() == 1);
  CHECK(c->hashtags[0] == "代表建议让学生在校内完成家庭作业");
}

TEST_CASE("clean_post removes mentions, author and location tags") {
  CHECK(cleaned("@张三 今天好累") == "今天好累");
  CHECK(cleaned("回复＠李四_99:真的吗") == "回复 :真的吗");
  CHECK(cleaned("我在这里:北京·朝阳区 堵车太久 显示地图") == "堵车太久");
  CHECK(cleaned("\xF0\x9F\x93\x8D上海 好挤") == "好挤");
  auto c = clean_post(raw("小明说 这也太离谱 小明", "小明"), {});
  REQUIRE(c.has_value());
  CHECK(c->text == "说 这也太离谱");
}

TEST_CASE("clean_post converts emoticons, longest sequence first") {
  EmoticonTable table{{"\xE2\x9D\xA4", "心"}, {"\xE2\x9D\xA4\xEF\xB8\x8F", "红心"}, {":)", "微笑"}};
  CHECK(cleaned("好\xE2\x9D\xA4\xEF\xB8\x8F:)", table) == "好 [红心] [微笑]");
  CHECK(cleaned("好\xE2\x9D\xA4", table) == "好 [心]");
  CHECK(cleaned("好:)", {}) == "好:)");
}

TEST_CASE("clean_post normalizes whitespace") {
  CHECK(cleaned("  a \t\n b　c  ") == "a b c");
}

TEST_CASE("characters tokenizer") {
  const Tokenizer t = Tokenizer::characters();
  CHECK(t.tokenize("abc de") == std::vector<std::string>{"a", "b", "c", "d", "e"});
  CHECK(t.tokenize("").empty());
  CHECK(t.tokenize("好，累！") == std::vector<std::string>{"好", "累"});
  CHECK(tokenize("[心]", t) == std::vector<std::string>{"心"});
}

TEST_CASE("lexicon tokenizer takes the longest match") {
  const Tokenizer t = Tokenizer::lexicon({"图书", "图书馆", "关门"});
  CHECK(t.tokenize("图书馆关门") == std::vector<std::string>{"图书馆", "关门"});
  const Tokenizer only = Tokenizer::lexicon({"图书馆"});
  CHECK(only.tokenize("图书馆关门") == std::vector<std::string>{"图书馆", "关", "门"});
  CHECK(only.tokenize("图书，馆") == std::vector<std::string>{"图", "书", "馆"});
}

TEST_CASE("characters tokenizer length equals retained code points") {
  Rng rng(11);
  const std::u32string alphabet = U"ab好累，。 !\t怒😂";
  for (int trial = 0; trial < 200; ++trial) {
    std::u32string s;
    const auto len = rng.below(40);
    for (std::uint64_t i = 0; i < len; ++i) s.push_back(alphabet[rng.below(alphabet.size())]);
    std::size_t retained = 0;
    for (char32_t cp : s) retained += !utf8::is_space(cp) && !utf8::is_punct(cp);
    CHECK(Tokenizer::characters().tokenize(utf8::encode(s)).size() == retained);
  }
}

TEST_CASE("filter_corpus bounds are inclusive") {
  std::vector<Post> posts{post_with_tokens(9), post_with_tokens(10), post_with_tokens(200),
                          post_with_tokens(201)};
  const FilterResult r = filter_corpus(posts);
  CHECK(r.report.n_too_short == 1);
  CHECK(r.report.n_too_long == 1);
  CHECK(r.report.n_kept == 2);
  CHECK(r.report.reconciles());
  REQUIRE(r.posts.size() == 2);
  CHECK(r.posts[0].token_count == 10);
  CHECK(r.posts[0].id == 0);
  CHECK(r.posts[1].token_count == 200);
  CHECK(r.posts[1].id == 1);
}

TEST_CASE("filter_corpus is idempotent") {
  Rng rng(3);
  std::vector<Post> posts;
  for (int i = 0; i < 300; ++i) posts.push_back(post_with_tokens(rng.below(260)));
  const FilterResult once = filter_corpus(posts);
  const FilterResult twice = filter_corpus(once.posts);
  CHECK(twice.posts == once.posts);
  CHECK(twice.report.n_kept == once.report.n_kept);
  CHECK(twice.report.n_too_short + twice.report.n_too_long == 0);
  for (const auto& p : once.posts) {
    CHECK(p.token_count >= 10);
    CHECK(p.token_count <= 200);
  }
  CHECK(once.report.reconciles());
}

TEST_CASE("ingest counts every rejection reason") {
  std::vector<RawPost> in;
  in.push_back(raw("http://t.cn/only"));
  in.push_back(raw("太短了"));
  in.push_back(raw("#某话题# 今天的作业真的太多了写到半夜"));
  in.push_back(raw(std::string(300, 'x')));
  in.back().hashtag = "h";
  const FilterResult r = ingest(in, Tokenizer::characters(), {});
  CHECK(r.report.n_input == 4);
  CHECK(r.report.n_empty_after_clean == 1);
  CHECK(r.report.n_too_short == 1);
  CHECK(r.report.n_too_long == 1);
  CHECK(r.report.n_kept == 1);
  CHECK(r.report.reconciles());
  REQUIRE(r.posts.size() == 1);
  CHECK(r.posts[0].hashtag == "某话题");
  CHECK(r.posts[0].token_count == 14);
  CHECK(r.posts[0].text.find("http") == std::string::npos);
}

TEST_CASE("shipped emoticon file matches the built-in table") {
  const EmoticonTable file = read_emoticons(CSCALE_SOURCE_DIR "/data/emoticons.json");
  CHECK(file == default_emoticons());
}
