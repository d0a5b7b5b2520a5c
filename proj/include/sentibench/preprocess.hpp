#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sentibench/error.hpp"

namespace sentibench {

// One review after preprocessing: normalized tokens plus its binary label.
// Tokens are at least two characters long and contain no whitespace,
// punctuation or digits.
struct TokenDoc {
  std::vector<std::string> tokens;
  int label = 0;

  bool operator==(const TokenDoc&) const = default;
};

namespace detail {

// Minimal UTF-8 iteration. Invalid bytes are treated as single-byte
// codepoints so malformed input degrades instead of crashing.
inline std::size_t utf8_len(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xe) return 3;
  if ((lead >> 3) == 0x1e) return 4;
  return 1;
}

inline char32_t utf8_decode(std::string_view s, std::size_t pos, std::size_t len) {
  unsigned char c0 = static_cast<unsigned char>(s[pos]);
  if (len == 1) return c0;
  char32_t cp = c0 & (0x7f >> len);
  for (std::size_t i = 1; i < len && pos + i < s.size(); ++i) {
    cp = (cp << 6) | (static_cast<unsigned char>(s[pos + i]) & 0x3f);
  }
  return cp;
}

inline std::size_t codepoint_count(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.size(); i += utf8_len(static_cast<unsigned char>(s[i]))) ++n;
  return n;
}

// Punctuation per the cleansing rules: ASCII punctuation plus the common
// Unicode punctuation blocks (Latin-1 punctuation, general punctuation,
// CJK brackets, fullwidth forms). Not the complete category P, which is
// irrelevant for marketplace review text.
inline bool is_punct_cp(char32_t cp) {
  if (cp < 0x80) {
    return std::ispunct(static_cast<unsigned char>(cp)) != 0;
  }
  static constexpr std::pair<char32_t, char32_t> kRanges[] = {
      {0x00a1, 0x00a1}, {0x00a7, 0x00a7}, {0x00ab, 0x00ab}, {0x00b6, 0x00b7},
      {0x00bb, 0x00bb}, {0x00bf, 0x00bf}, {0x2010, 0x2027}, {0x2030, 0x205e},
      {0x2e00, 0x2e52}, {0x3001, 0x3003}, {0x3008, 0x3011}, {0x3014, 0x301f},
      {0x30fb, 0x30fb}, {0xfe50, 0xfe6b}, {0xff01, 0xff0f}, {0xff1a, 0xff20},
      {0xff3b, 0xff40}, {0xff5b, 0xff65},
  };
  for (auto [lo, hi] : kRanges) {
    if (cp >= lo && cp <= hi) return true;
  }
  return false;
}

inline bool is_ws(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

inline std::string lowercase_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace detail

// Step 1: lowercase all characters. ASCII and the Latin-1 supplement are
// mapped; other codepoints pass through unchanged (Indonesian review text
// is Latin-script). Idempotent.
inline std::string case_fold(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t len = detail::utf8_len(static_cast<unsigned char>(text[i]));
    if (len == 1) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[i]))));
    } else if (len == 2 && i + 1 < text.size()) {
      char32_t cp = detail::utf8_decode(text, i, 2);
      // Latin-1 supplement: U+00C0..U+00DE map to +0x20, except U+00D7.
      if (cp >= 0x00c0 && cp <= 0x00de && cp != 0x00d7) cp += 0x20;
      out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
      out.append(text.substr(i, std::min(len, text.size() - i)));
    }
    i += len;
  }
  return out;
}

// Step 2: delete URLs (http/https schemes and bare "www." prefixes), HTML
// tags, @mentions, #hashtags, punctuation and digits. Rules are tested in
// that order at each position; every removed span is replaced by a single
// space so that neighbouring words are never glued together.
inline std::string cleanse(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  auto starts_with = [&](std::string_view prefix) {
    return text.substr(i, prefix.size()) == prefix;
  };
  while (i < text.size()) {
    // URL: scheme or bare www. at a word boundary, then the non-space run.
    bool at_boundary = (i == 0) || !detail::is_word_char(text[i - 1]);
    if ((starts_with("http://") || starts_with("https://") ||
         (at_boundary && starts_with("www."))) &&
        !detail::is_ws(text[i])) {
      while (i < text.size() && !detail::is_ws(text[i])) ++i;
      out.push_back(' ');
      continue;
    }
    // HTML tag: <...> with a closing bracket present.
    if (text[i] == '<') {
      std::size_t close = text.find('>', i + 1);
      if (close != std::string_view::npos) {
        i = close + 1;
        out.push_back(' ');
        continue;
      }
    }
    // Mention / hashtag: marker plus the following word run.
    if ((text[i] == '@' || text[i] == '#') && i + 1 < text.size() &&
        detail::is_word_char(text[i + 1])) {
      ++i;
      while (i < text.size() && detail::is_word_char(text[i])) ++i;
      out.push_back(' ');
      continue;
    }
    std::size_t len = detail::utf8_len(static_cast<unsigned char>(text[i]));
    char32_t cp = detail::utf8_decode(text, i, std::min(len, text.size() - i));
    if (detail::is_punct_cp(cp) || (cp >= '0' && cp <= '9')) {
      out.push_back(' ');
    } else {
      out.append(text.substr(i, std::min(len, text.size() - i)));
    }
    i += len;
  }
  return out;
}

// Splits on runs of whitespace. No length filtering here.
inline std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && detail::is_ws(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !detail::is_ws(text[i])) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

// Step 4 as a standalone operation: whitespace split plus the minimum
// token length of 2 (counted in codepoints).
inline std::vector<std::string> tokenize_filter(std::string_view text) {
  std::vector<std::string> out = split_whitespace(text);
  std::erase_if(out, [](const std::string& t) { return detail::codepoint_count(t) < 2; });
  return out;
}

// Dictionary mapping informal tokens to canonical forms. Keys and values
// are lowercase, non-empty and contain no whitespace. For the pipeline
// idempotence guarantee, values should not themselves be keys (the bundled
// dictionary maps every slang form directly to its final word).
class SlangDict {
 public:
  SlangDict() = default;

  static SlangDict from_pairs(
      std::initializer_list<std::pair<std::string, std::string>> pairs) {
    SlangDict d;
    for (const auto& [k, v] : pairs) d.insert(k, v);
    return d;
  }

  void insert(std::string_view key, std::string_view value) {
    std::string k = detail::lowercase_ascii(key);
    std::string v = detail::lowercase_ascii(value);
    auto bad = [](const std::string& s) {
      return s.empty() || std::any_of(s.begin(), s.end(), detail::is_ws);
    };
    if (bad(k) || bad(v)) {
      throw InputError("slang dictionary entries must be non-empty and whitespace-free");
    }
    entries_[std::move(k)] = std::move(v);
  }

  const std::string* lookup(const std::string& token) const {
    auto it = entries_.find(token);
    return it == entries_.end() ? nullptr : &it->second;
  }

  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

// Step 3: single-pass dictionary replacement. Non-keys pass through; there
// is no transitive rewriting.
inline std::vector<std::string> normalize_slang(const std::vector<std::string>& tokens,
                                                const SlangDict& dict) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    const std::string* v = dict.lookup(t);
    out.push_back(v ? *v : t);
  }
  return out;
}

// The full cleaning pipeline: case fold, cleanse, whitespace split, slang
// normalization, then the minimum-length filter. Slang mapping runs before
// the length filter so that one-character slang keys still expand.
inline TokenDoc run_pipeline(std::string_view text, const SlangDict& dict, int label) {
  std::vector<std::string> tokens = split_whitespace(cleanse(case_fold(text)));
  tokens = normalize_slang(tokens, dict);
  std::erase_if(tokens, [](const std::string& t) { return detail::codepoint_count(t) < 2; });
  return TokenDoc{std::move(tokens), label};
}

// Parses `informal<TAB>canonical` lines. '#'-prefixed lines and blank
// lines are skipped; later duplicates override earlier entries; keys and
// values are lowercased.
inline SlangDict parse_slang_dict(std::istream& in, std::string_view source_name) {
  SlangDict dict;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view sv(line);
    if (sv.empty() || sv.front() == '#') continue;
    std::size_t tab = sv.find('\t');
    if (tab == std::string_view::npos || tab == 0 || tab + 1 == sv.size()) {
      throw InputError(std::string(source_name) + ":" + std::to_string(line_no) +
                       ": expected 'informal<TAB>canonical'");
    }
    try {
      dict.insert(sv.substr(0, tab), sv.substr(tab + 1));
    } catch (const InputError& e) {
      throw InputError(std::string(source_name) + ":" + std::to_string(line_no) + ": " +
                       e.what());
    }
  }
  return dict;
}

inline SlangDict load_slang_dict(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open slang dictionary: " + path);
  return parse_slang_dict(in, path);
}

}  // namespace sentibench
