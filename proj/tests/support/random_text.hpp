#pragma once

#include <random>
#include <string>

#include "ragbench/utf8.hpp"

namespace ragbench::testing {

/// Random valid UTF-8 of `n` scalars mixing 1-, 2-, 3- and 4-byte encodings.
inline std::string random_utf8(std::mt19937_64& rng, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    char32_t cp = 0;
    switch (rng() % 4) {
      case 0: cp = 0x20 + rng() % 0x5F; break;
      case 1: cp = 0xA0 + rng() % (0x800 - 0xA0); break;
      case 2:
        do cp = 0x800 + rng() % (0x10000 - 0x800);
        while (cp >= 0xD800 && cp <= 0xDFFF);
        break;
      default: cp = 0x10000 + rng() % (0x110000 - 0x10000); break;
    }
    utf8::append(s, cp);
  }
  return s;
}

}  // namespace ragbench::testing
