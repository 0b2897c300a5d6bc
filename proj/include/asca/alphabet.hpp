#pragma once

#include <string>
#include <string_view>

#include "asca/errors.hpp"

namespace asca {

// Channel alphabet: 36 trainable classes (a..z, 0..9) plus SPACE, which only
// exists in the sentence channel, never as a classifier label.
inline constexpr std::string_view kSymbols = "abcdefghijklmnopqrstuvwxyz0123456789 ";
inline constexpr int kNumKeys = 36;
inline constexpr int kSpaceIndex = 36;
inline constexpr int kAlphabetSize = 37;

inline int symbol_index(char c) {
  if (c >= 'a' && c <= 'z') return c - 'a';
  if (c >= '0' && c <= '9') return 26 + (c - '0');
  if (c == ' ') return kSpaceIndex;
  throw AlphabetError(std::string("character outside alphabet: '") + c + "'");
}

inline char index_symbol(int i) {
  if (i < 0 || i >= kAlphabetSize) throw AlphabetError("symbol index out of range");
  return kSymbols[static_cast<std::size_t>(i)];
}

}  // namespace asca
