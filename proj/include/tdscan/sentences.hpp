#pragma once

#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace tdscan {

namespace detail {

// Abbreviations whose trailing '.' never ends a sentence. Matched
// case-insensitively against the text ending at the period.
inline constexpr std::array<std::string_view, 12> kAbbreviations = {
    "e.g.", "i.e.", "et al.", "vs.", "etc.", "cf.",
    "fig.", "no.", "vol.", "al.", "resp.", "approx.",
};

inline bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

// True when text[0..end] (end points at '.') terminates in a guarded
// abbreviation preceded by start-of-text or whitespace.
inline bool ends_in_abbreviation(std::string_view text, std::size_t end) {
  for (std::string_view abbr : kAbbreviations) {
    if (end + 1 < abbr.size()) continue;
    std::size_t start = end + 1 - abbr.size();
    bool match = true;
    for (std::size_t i = 0; i < abbr.size(); ++i) {
      char a = text[start + i];
      char b = abbr[i];
      if (a >= 'A' && a <= 'Z') a = static_cast<char>(a - 'A' + 'a');
      if (a != b) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    if (start == 0 || is_ascii_space(text[start - 1])) return true;
  }
  return false;
}

}  // namespace detail

// Removes fenced code blocks (``` ... ```) and inline code spans (`...`),
// replacing them with a single space so neighbouring words do not merge.
// An unterminated fence swallows the rest of the text, which matches how
// markdown renders truncated comments.
inline std::string strip_markdown_code(std::string_view body) {
  std::string out;
  out.reserve(body.size());
  std::size_t i = 0;
  while (i < body.size()) {
    if (body.compare(i, 3, "```") == 0) {
      std::size_t close = body.find("```", i + 3);
      i = (close == std::string_view::npos) ? body.size() : close + 3;
      out.push_back(' ');
      continue;
    }
    if (body[i] == '`') {
      std::size_t close = body.find('`', i + 1);
      if (close != std::string_view::npos) {
        i = close + 1;
        out.push_back(' ');
        continue;
      }
    }
    out.push_back(body[i]);
    ++i;
  }
  return out;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && detail::is_ascii_space(s[b])) ++b;
  while (e > b && detail::is_ascii_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

// trim plus interior whitespace runs collapsed to single spaces
inline std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending = false;
  for (char c : s) {
    if (detail::is_ascii_space(c)) {
      pending = !out.empty();
      continue;
    }
    if (pending) {
      out.push_back(' ');
      pending = false;
    }
    out.push_back(c);
  }
  return out;
}

// Splits comment text into trimmed, non-empty sentences. Code blocks and
// inline code are removed first. A '.', '!' or '?' ends a sentence when
// followed by whitespace and a capital letter, or by end of text; periods
// closing a known abbreviation do not.
inline std::vector<std::string> split_sentences(std::string_view body) {
  const std::string text = strip_markdown_code(body);
  std::vector<std::string> sentences;
  std::size_t start = 0;

  auto flush = [&](std::size_t end_exclusive) {
    std::string s = collapse_whitespace(std::string_view(text).substr(start, end_exclusive - start));
    if (!s.empty()) sentences.push_back(std::move(s));
    start = end_exclusive;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    if (c == '.' && detail::ends_in_abbreviation(text, i)) continue;

    // absorb a run of terminators ("?!", "...")
    std::size_t end = i + 1;
    while (end < text.size() && (text[end] == '.' || text[end] == '!' || text[end] == '?')) ++end;

    std::size_t j = end;
    while (j < text.size() && detail::is_ascii_space(text[j])) ++j;
    if (j == text.size()) {
      flush(end);
      break;
    }
    if (j > end && detail::is_upper(text[j])) {
      flush(end);
      i = j - 1;
    } else {
      i = end - 1;
    }
  }
  flush(text.size());
  return sentences;
}

}  // namespace tdscan
