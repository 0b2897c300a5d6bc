#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace asca {

struct AttackTranscript;  // attack.hpp

// Character-alignment accuracy: 2*|LCS(s1, s2)| / (|s1| + |s2|).
// Both strings empty -> 1.0. Symmetric.
double char_accuracy(std::string_view s1, std::string_view s2);

// Alternative matching-blocks (Ratcliff/Obershelp-style) reading of the same
// accuracy; kept behind this separate entry point, LCS is the default.
double char_accuracy_blocks(std::string_view s1, std::string_view s2);

// Sentence-level BLEU, uniform weights over n = 1..4, clipped modified
// precision, brevity penalty exp(1 - r/c) for c < r. Zero-count n-gram
// precisions are smoothed to 1/(2 * hyp_token_count). Empty hyp -> 0.
double bleu(const std::string& ref, const std::string& hyp);

// METEOR variant: exact-match then Porter-stem unigram alignment, F = 10PR /
// (R + 9P), penalty = 0.5 * (chunks/matches)^3. The synonymy stage of full
// METEOR is omitted.
double meteor_lite(const std::string& ref, const std::string& hyp);

// F1 over clipped n-gram overlap, n in {1, 2}.
double rouge_n(const std::string& ref, const std::string& hyp, int n);

// F1 from token-level LCS.
double rouge_l(const std::string& ref, const std::string& hyp);

std::string porter_stem(std::string word);

std::vector<std::string> tokenize(const std::string& s);

// Which transcript field is scored against the truth.
enum class ScoreTarget { corrected, predicted };

struct MetricReport {
  // metric name -> per-sentence scores, in transcript order.
  std::map<std::string, std::vector<double>> per_sentence;
  std::map<std::string, double> mean;
  std::map<std::string, double> stdev;
  std::string noise_level;
  std::string backend;
  std::string target;  // "corrected" | "predicted"
  std::size_t count = 0;
};

inline const std::vector<std::string> kMetricNames = {
    "accuracy", "bleu", "meteor", "rouge1", "rouge2", "rougeL"};

MetricReport score_transcripts(const std::vector<AttackTranscript>& transcripts,
                               ScoreTarget target = ScoreTarget::corrected,
                               const std::string& backend = "");

std::string report_to_json(const MetricReport& report);
MetricReport report_from_json(const std::string& text);

// Aligned text table: rows = metric x noise level, columns = backends.
std::string render_report_table(const std::vector<MetricReport>& reports);

}  // namespace asca
