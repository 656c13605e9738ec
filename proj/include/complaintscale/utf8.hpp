#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cscale::utf8 {

// Decodes UTF-8 into code points. Malformed bytes decode to U+FFFD one byte
// at a time, so the function never fails.
std::u32string decode(std::string_view text);

std::string encode(char32_t cp);
std::string encode(std::u32string_view cps);

bool is_space(char32_t cp);

// ASCII punctuation, Latin-1 punctuation, General Punctuation, CJK symbols
// and punctuation, and the punctuation parts of the fullwidth block.
bool is_punct(char32_t cp);

// Byte offsets of each code point start, plus text.size() as a sentinel.
std::vector<std::size_t> boundaries(std::string_view text);

}  // namespace cscale::utf8
