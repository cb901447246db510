#pragma once

// Minimal UTF-8 helpers. Everything here works on Unicode scalar values;
// callers are expected to hand in valid UTF-8 (see `sanitize`).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ragbench::utf8 {

namespace detail {

constexpr bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

/// Decodes one scalar value at `pos`. Returns the value and its byte length,
/// or nullopt for an invalid/overlong/surrogate/truncated sequence.
inline std::optional<std::pair<char32_t, std::size_t>> decode_at(std::string_view s,
                                                                 std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) return std::pair{static_cast<char32_t>(b0), std::size_t{1}};

  std::size_t len = 0;
  char32_t cp = 0;
  char32_t min = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2, cp = b0 & 0x1F, min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3, cp = b0 & 0x0F, min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4, cp = b0 & 0x07, min = 0x10000;
  } else {
    return std::nullopt;
  }
  if (pos + len > s.size()) return std::nullopt;
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if (!is_continuation(b)) return std::nullopt;
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return std::nullopt;
  return std::pair{cp, len};
}

}  // namespace detail

inline void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline bool is_valid(std::string_view s) {
  for (std::size_t pos = 0; pos < s.size();) {
    auto d = detail::decode_at(s, pos);
    if (!d) return false;
    pos += d->second;
  }
  return true;
}

/// Replaces every invalid byte with U+FFFD.
inline std::string sanitize(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t pos = 0; pos < s.size();) {
    if (auto d = detail::decode_at(s, pos)) {
      out.append(s.substr(pos, d->second));
      pos += d->second;
    } else {
      append(out, 0xFFFD);
      ++pos;
    }
  }
  return out;
}

inline std::vector<char32_t> decode(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  for (std::size_t pos = 0; pos < s.size();) {
    auto d = detail::decode_at(s, pos);
    if (!d) {
      out.push_back(0xFFFD);
      ++pos;
      continue;
    }
    out.push_back(d->first);
    pos += d->second;
  }
  return out;
}

inline std::string encode(const std::vector<char32_t>& cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) append(out, cp);
  return out;
}

/// Byte offset of every scalar value, plus a final entry equal to s.size().
inline std::vector<std::size_t> boundaries(std::string_view s) {
  std::vector<std::size_t> out;
  out.reserve(s.size() + 1);
  for (std::size_t pos = 0; pos < s.size();) {
    out.push_back(pos);
    auto d = detail::decode_at(s, pos);
    pos += d ? d->second : 1;
  }
  out.push_back(s.size());
  return out;
}

inline std::size_t length(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < s.size(); ++n) {
    auto d = detail::decode_at(s, pos);
    pos += d ? d->second : 1;
  }
  return n;
}

/// First `max_codepoints` scalar values of `s`.
inline std::string truncate(std::string_view s, std::size_t max_codepoints) {
  std::size_t pos = 0;
  for (std::size_t n = 0; n < max_codepoints && pos < s.size(); ++n) {
    auto d = detail::decode_at(s, pos);
    pos += d ? d->second : 1;
  }
  return std::string(s.substr(0, pos));
}

/// Simple (1:1) lowercase folding for ASCII, Latin-1, Latin Extended-A,
/// Greek and Cyrillic. Other scalars pass through unchanged.
constexpr char32_t fold(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
  if (cp < 0x80) return cp;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if (cp >= 0x100 && cp <= 0x137) return cp | 1;
  if (cp >= 0x139 && cp <= 0x148) return (cp & 1) ? cp + 1 : cp;
  if (cp >= 0x14A && cp <= 0x177) return cp | 1;
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x179 && cp <= 0x17E) return (cp & 1) ? cp + 1 : cp;
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  return cp;
}

inline std::string case_fold(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t pos = 0; pos < s.size();) {
    auto d = detail::decode_at(s, pos);
    if (!d) {
      append(out, 0xFFFD);
      ++pos;
      continue;
    }
    if (d->first < 0x80) {
      out.push_back(static_cast<char>(fold(d->first)));
    } else {
      append(out, fold(d->first));
    }
    pos += d->second;
  }
  return out;
}

constexpr bool is_space(char32_t cp) {
  return cp == U' ' || (cp >= U'\t' && cp <= U'\r') || cp == 0x85 || cp == 0xA0 ||
         cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 ||
         cp == 0x2029 || cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

/// Word characters for tokenization: ASCII alphanumerics, and any non-ASCII
/// scalar outside the whitespace and General Punctuation blocks.
constexpr bool is_word(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= U'0' && cp <= U'9') || (cp >= U'a' && cp <= U'z') ||
           (cp >= U'A' && cp <= U'Z');
  }
  if (is_space(cp)) return false;
  if (cp >= 0x2000 && cp <= 0x206F) return false;
  if (cp >= 0xA1 && cp <= 0xBF && cp != 0xAA && cp != 0xB5 && cp != 0xBA) return false;
  if (cp == 0xD7 || cp == 0xF7 || cp == 0xFFFD) return false;
  return true;
}

}  // namespace ragbench::utf8
