#include <string>

#include "asca/metrics.hpp"

// Porter's stemming algorithm (1980), standard step sequence 1a-5b.

namespace asca {

namespace {

bool is_consonant(const std::string& w, std::size_t i) {
  switch (w[i]) {
    case 'a':
    case 'e':
    case 'i':
    case 'o':
    case 'u':
      return false;
    case 'y':
      return i == 0 ? true : !is_consonant(w, i - 1);
    default:
      return true;
  }
}

// Number of VC sequences in [C](VC)^m[V].
int measure(const std::string& w) {
  int m = 0;
  std::size_t i = 0;
  const std::size_t n = w.size();
  while (i < n && is_consonant(w, i)) ++i;
  while (i < n) {
    while (i < n && !is_consonant(w, i)) ++i;
    if (i == n) break;
    ++m;
    while (i < n && is_consonant(w, i)) ++i;
  }
  return m;
}

bool has_vowel(const std::string& w) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!is_consonant(w, i)) return true;
  }
  return false;
}

bool double_consonant(const std::string& w) {
  const std::size_t n = w.size();
  return n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1);
}

// *o: stem ends cvc where the final c is not w, x, or y.
bool ends_cvc(const std::string& w) {
  const std::size_t n = w.size();
  if (n < 3) return false;
  if (!is_consonant(w, n - 3) || is_consonant(w, n - 2) || !is_consonant(w, n - 1)) {
    return false;
  }
  const char c = w[n - 1];
  return c != 'w' && c != 'x' && c != 'y';
}

bool ends_with(const std::string& w, const std::string& suffix) {
  return w.size() >= suffix.size() &&
         w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string stem_of(const std::string& w, const std::string& suffix) {
  return w.substr(0, w.size() - suffix.size());
}

// Replace suffix when the measure condition on the stem holds.
bool try_rule(std::string& w, const std::string& suffix, const std::string& repl,
              int min_m) {
  if (!ends_with(w, suffix)) return false;
  const std::string stem = stem_of(w, suffix);
  if (measure(stem) > min_m) w = stem + repl;
  return true;  // suffix matched, stop scanning this step's rules
}

}  // namespace

std::string porter_stem(std::string w) {
  if (w.size() <= 2) return w;

  // Step 1a
  if (ends_with(w, "sses")) {
    w = stem_of(w, "es");
  } else if (ends_with(w, "ies")) {
    w = stem_of(w, "es");
  } else if (ends_with(w, "ss")) {
    // keep
  } else if (ends_with(w, "s")) {
    w = stem_of(w, "s");
  }

  // Step 1b
  bool step1b_fix = false;
  if (ends_with(w, "eed")) {
    if (measure(stem_of(w, "eed")) > 0) w = stem_of(w, "d");
  } else if (ends_with(w, "ed") && has_vowel(stem_of(w, "ed"))) {
    w = stem_of(w, "ed");
    step1b_fix = true;
  } else if (ends_with(w, "ing") && has_vowel(stem_of(w, "ing"))) {
    w = stem_of(w, "ing");
    step1b_fix = true;
  }
  if (step1b_fix) {
    if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
      w += 'e';
    } else if (double_consonant(w) && !ends_with(w, "l") && !ends_with(w, "s") &&
               !ends_with(w, "z")) {
      w.pop_back();
    } else if (measure(w) == 1 && ends_cvc(w)) {
      w += 'e';
    }
  }

  // Step 1c
  if (ends_with(w, "y") && has_vowel(stem_of(w, "y"))) {
    w.back() = 'i';
  }

  // Step 2
  static const std::pair<const char*, const char*> step2[] = {
      {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"}, {"anci", "ance"},
      {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},   {"entli", "ent"},
      {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
      {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
      {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"}};
  for (const auto& [suf, repl] : step2) {
    if (try_rule(w, suf, repl, 0)) break;
  }

  // Step 3
  static const std::pair<const char*, const char*> step3[] = {
      {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
      {"ical", "ic"},  {"ful", ""},   {"ness", ""}};
  for (const auto& [suf, repl] : step3) {
    if (try_rule(w, suf, repl, 0)) break;
  }

  // Step 4
  static const char* step4[] = {"al",   "ance", "ence", "er",  "ic",  "able",
                                "ible", "ant",  "ement", "ment", "ent", "ou",
                                "ism",  "ate",  "iti",  "ous", "ive", "ize"};
  bool matched4 = false;
  for (const char* suf : step4) {
    if (ends_with(w, suf)) {
      if (measure(stem_of(w, suf)) > 1) w = stem_of(w, suf);
      matched4 = true;
      break;
    }
  }
  if (!matched4 && ends_with(w, "ion")) {
    const std::string stem = stem_of(w, "ion");
    if (measure(stem) > 1 && (ends_with(stem, "s") || ends_with(stem, "t"))) {
      w = stem;
    }
  }

  // Step 5a
  if (ends_with(w, "e")) {
    const std::string stem = stem_of(w, "e");
    const int m = measure(stem);
    if (m > 1 || (m == 1 && !ends_cvc(stem))) w = stem;
  }
  // Step 5b
  if (double_consonant(w) && ends_with(w, "l") && measure(w) > 1) {
    w.pop_back();
  }
  return w;
}

}  // namespace asca
