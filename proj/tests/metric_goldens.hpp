#pragma once

#include <string>
#include <vector>

// Worked micro-examples; each value was derived by hand from the metric definitions.
// Tokens are single characters; '-' marks an undefined score.
namespace testing {

struct Golden {
  const char* metric;  // bleu, bleu+1, rouge1, rouge2, rougeL, meteor
  const char* candidate;
  const char* reference;
  double expected;
  bool defined = true;
};

inline const std::vector<Golden>& metric_goldens() {
  static const std::vector<Golden> g{
      {"bleu", "abcd", "abcd", 1.0},
      {"bleu", "abcde", "abcdf", 0.668740304976422},
      {"bleu", "ab", "abcd", 0.36787944117144233},
      {"bleu", "aaaa", "abcd", 0.0},
      {"bleu+1", "aaaa", "abcd", 0.3194715521231362},
      {"bleu", "xyz", "abc", 0.0},
      {"bleu", "abcdef", "abcd", 0.5081327481546147},
      {"rouge1", "abcde", "abcf", 2.0 / 3.0},
      {"rouge1", "abcd", "dcba", 1.0},
      {"rouge1", "aab", "abb", 2.0 / 3.0},
      {"rouge2", "abcde", "abcf", 4.0 / 7.0},
      {"rouge2", "abab", "ab", 0.5},
      {"rouge2", "a", "ab", 0.0, false},
      {"rougeL", "abcde", "abcf", 2.0 / 3.0},
      {"rougeL", "abcd", "dcba", 0.25},
      {"rougeL", "abxcd", "abcd", 8.0 / 9.0},
      {"meteor", "abcde", "abcde", 0.996},
      {"meteor", "abcd", "cdab", 0.9375},
      {"meteor", "xyz", "abc", 0.0},
      {"meteor", "abc", "abcdef", 0.5165692007797271},
      {"meteor", "axb", "ab", 0.47619047619047616},
      {"meteor", "abcab", "ab", 0.8152173913043479},
  };
  return g;
}

}  // namespace testing
