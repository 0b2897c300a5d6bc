#include "asca/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "asca/attack.hpp"

namespace asca {

using nlohmann::json;

namespace {

// Length of the longest common subsequence over arbitrary element sequences.
template <typename Seq>
std::size_t lcs_length(const Seq& a, const Seq& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::size_t> prev(m + 1, 0), cur(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

std::size_t matching_blocks(std::string_view a, std::string_view b) {
  if (a.empty() || b.empty()) return 0;
  // Longest common substring.
  std::size_t best_len = 0, best_i = 0, best_j = 0;
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = a[i - 1] == b[j - 1] ? diag + 1 : 0;
      if (row[j] > best_len) {
        best_len = row[j];
        best_i = i - row[j];
        best_j = j - row[j];
      }
      diag = up;
    }
  }
  if (best_len == 0) return 0;
  return best_len + matching_blocks(a.substr(0, best_i), b.substr(0, best_j)) +
         matching_blocks(a.substr(best_i + best_len), b.substr(best_j + best_len));
}

std::map<std::vector<std::string>, int> ngram_counts(const std::vector<std::string>& toks,
                                                     int n) {
  std::map<std::vector<std::string>, int> counts;
  if (static_cast<int>(toks.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    ++counts[std::vector<std::string>(toks.begin() + static_cast<long>(i),
                                      toks.begin() + static_cast<long>(i) + n)];
  }
  return counts;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

double stdev_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

std::vector<std::string> tokenize(const std::string& s) {
  std::vector<std::string> toks;
  std::istringstream in(s);
  std::string t;
  while (in >> t) toks.push_back(t);
  return toks;
}

double char_accuracy(std::string_view s1, std::string_view s2) {
  if (s1.empty() && s2.empty()) return 1.0;
  const auto lcs = lcs_length(s1, s2);
  return 2.0 * static_cast<double>(lcs) / static_cast<double>(s1.size() + s2.size());
}

double char_accuracy_blocks(std::string_view s1, std::string_view s2) {
  if (s1.empty() && s2.empty()) return 1.0;
  const auto m = matching_blocks(s1, s2);
  return 2.0 * static_cast<double>(m) / static_cast<double>(s1.size() + s2.size());
}

double bleu(const std::string& ref, const std::string& hyp) {
  const auto ref_toks = tokenize(ref);
  const auto hyp_toks = tokenize(hyp);
  if (hyp_toks.empty()) return 0.0;

  double log_sum = 0.0;
  for (int n = 1; n <= 4; ++n) {
    const auto rc = ngram_counts(ref_toks, n);
    const auto hc = ngram_counts(hyp_toks, n);
    int clipped = 0, total = 0;
    for (const auto& [gram, count] : hc) {
      const auto it = rc.find(gram);
      clipped += std::min(count, it == rc.end() ? 0 : it->second);
      total += count;
    }
    double p;
    if (total == 0 || clipped == 0) {
      p = 1.0 / (2.0 * static_cast<double>(hyp_toks.size()));
    } else {
      p = static_cast<double>(clipped) / static_cast<double>(total);
    }
    log_sum += 0.25 * std::log(p);
  }
  const auto r = static_cast<double>(ref_toks.size());
  const auto c = static_cast<double>(hyp_toks.size());
  const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return bp * std::exp(log_sum);
}

double meteor_lite(const std::string& ref, const std::string& hyp) {
  const auto ref_toks = tokenize(ref);
  const auto hyp_toks = tokenize(hyp);
  if (ref_toks.empty() || hyp_toks.empty()) return 0.0;

  // alignment[i] = matched ref index for hyp token i, or -1.
  std::vector<int> alignment(hyp_toks.size(), -1);
  std::vector<bool> ref_used(ref_toks.size(), false);

  const auto run_stage = [&](auto&& same) {
    int prev_ref = -2;
    for (std::size_t i = 0; i < hyp_toks.size(); ++i) {
      if (alignment[i] != -1) {
        prev_ref = alignment[i];
        continue;
      }
      // Prefer the continuation of the previous match to keep chunks long,
      // otherwise the leftmost unused candidate.
      int pick = -1;
      for (std::size_t j = 0; j < ref_toks.size(); ++j) {
        if (ref_used[j] || !same(hyp_toks[i], ref_toks[j])) continue;
        if (static_cast<int>(j) == prev_ref + 1) {
          pick = static_cast<int>(j);
          break;
        }
        if (pick == -1) pick = static_cast<int>(j);
      }
      if (pick != -1) {
        alignment[i] = pick;
        ref_used[static_cast<std::size_t>(pick)] = true;
        prev_ref = pick;
      }
    }
  };
  run_stage([](const std::string& a, const std::string& b) { return a == b; });
  run_stage([](const std::string& a, const std::string& b) {
    return porter_stem(a) == porter_stem(b);
  });

  int matches = 0, chunks = 0;
  int prev_ref = -2;
  for (std::size_t i = 0; i < hyp_toks.size(); ++i) {
    if (alignment[i] == -1) {
      prev_ref = -2;
      continue;
    }
    ++matches;
    if (alignment[i] != prev_ref + 1) ++chunks;
    prev_ref = alignment[i];
  }
  if (matches == 0) return 0.0;

  const double p = static_cast<double>(matches) / static_cast<double>(hyp_toks.size());
  const double r = static_cast<double>(matches) / static_cast<double>(ref_toks.size());
  const double f = 10.0 * p * r / (r + 9.0 * p);
  const double frag = static_cast<double>(chunks) / static_cast<double>(matches);
  return f * (1.0 - 0.5 * frag * frag * frag);
}

double rouge_n(const std::string& ref, const std::string& hyp, int n) {
  if (n != 1 && n != 2) throw std::invalid_argument("rouge_n: n must be 1 or 2");
  const auto ref_toks = tokenize(ref);
  const auto hyp_toks = tokenize(hyp);
  const auto rc = ngram_counts(ref_toks, n);
  const auto hc = ngram_counts(hyp_toks, n);
  int ref_total = 0, hyp_total = 0, overlap = 0;
  for (const auto& [g, cnt] : rc) ref_total += cnt;
  for (const auto& [g, cnt] : hc) hyp_total += cnt;
  if (ref_total == 0 && hyp_total == 0) return 1.0;
  if (ref_total == 0 || hyp_total == 0) return 0.0;
  for (const auto& [gram, count] : hc) {
    const auto it = rc.find(gram);
    if (it != rc.end()) overlap += std::min(count, it->second);
  }
  if (overlap == 0) return 0.0;
  const double prec = static_cast<double>(overlap) / hyp_total;
  const double rec = static_cast<double>(overlap) / ref_total;
  return 2.0 * prec * rec / (prec + rec);
}

double rouge_l(const std::string& ref, const std::string& hyp) {
  const auto ref_toks = tokenize(ref);
  const auto hyp_toks = tokenize(hyp);
  if (ref_toks.empty() && hyp_toks.empty()) return 1.0;
  if (ref_toks.empty() || hyp_toks.empty()) return 0.0;
  const auto lcs = static_cast<double>(lcs_length(ref_toks, hyp_toks));
  if (lcs == 0.0) return 0.0;
  const double prec = lcs / static_cast<double>(hyp_toks.size());
  const double rec = lcs / static_cast<double>(ref_toks.size());
  return 2.0 * prec * rec / (prec + rec);
}

MetricReport score_transcripts(const std::vector<AttackTranscript>& transcripts,
                               ScoreTarget target, const std::string& backend) {
  if (transcripts.empty()) {
    throw std::invalid_argument("score_transcripts: no transcripts to score");
  }
  MetricReport report;
  report.backend = backend;
  report.target = target == ScoreTarget::corrected ? "corrected" : "predicted";
  report.count = transcripts.size();
  report.noise_level = transcripts.front().noise_level;

  for (const auto& t : transcripts) {
    const std::string* hyp = nullptr;
    if (target == ScoreTarget::predicted) {
      hyp = &t.predicted;
    } else {
      if (!t.corrected) {
        throw std::invalid_argument("score_transcripts: transcript lacks corrected text");
      }
      hyp = &*t.corrected;
    }
    report.per_sentence["accuracy"].push_back(char_accuracy(t.truth, *hyp));
    report.per_sentence["bleu"].push_back(bleu(t.truth, *hyp));
    report.per_sentence["meteor"].push_back(meteor_lite(t.truth, *hyp));
    report.per_sentence["rouge1"].push_back(rouge_n(t.truth, *hyp, 1));
    report.per_sentence["rouge2"].push_back(rouge_n(t.truth, *hyp, 2));
    report.per_sentence["rougeL"].push_back(rouge_l(t.truth, *hyp));
  }
  for (const auto& name : kMetricNames) {
    const auto& scores = report.per_sentence[name];
    report.mean[name] = mean_of(scores);
    report.stdev[name] = stdev_of(scores, report.mean[name]);
  }
  return report;
}

std::string report_to_json(const MetricReport& report) {
  json j;
  j["noise_level"] = report.noise_level;
  j["backend"] = report.backend;
  j["target"] = report.target;
  j["count"] = report.count;
  for (const auto& name : kMetricNames) {
    j["mean"][name] = report.mean.at(name);
    j["stdev"][name] = report.stdev.at(name);
    j["per_sentence"][name] = report.per_sentence.at(name);
  }
  return j.dump(2) + "\n";
}

MetricReport report_from_json(const std::string& text) {
  const json j = json::parse(text);
  MetricReport report;
  report.noise_level = j.at("noise_level").get<std::string>();
  report.backend = j.at("backend").get<std::string>();
  report.target = j.at("target").get<std::string>();
  report.count = j.at("count").get<std::size_t>();
  for (const auto& name : kMetricNames) {
    report.mean[name] = j.at("mean").at(name).get<double>();
    report.stdev[name] = j.at("stdev").at(name).get<double>();
    report.per_sentence[name] = j.at("per_sentence").at(name).get<std::vector<double>>();
  }
  return report;
}

std::string render_report_table(const std::vector<MetricReport>& reports) {
  std::vector<std::string> backends;
  std::vector<std::string> levels;
  for (const auto& r : reports) {
    if (std::find(backends.begin(), backends.end(), r.backend) == backends.end()) {
      backends.push_back(r.backend);
    }
    if (std::find(levels.begin(), levels.end(), r.noise_level) == levels.end()) {
      levels.push_back(r.noise_level);
    }
  }

  std::ostringstream out;
  out << std::left << std::setw(22) << "Metric (Noise)";
  for (const auto& b : backends) out << std::setw(18) << b;
  out << "\n";
  for (const auto& metric : kMetricNames) {
    for (const auto& level : levels) {
      out << std::left << std::setw(22) << (metric + " (" + level + ")");
      for (const auto& b : backends) {
        const auto it = std::find_if(reports.begin(), reports.end(), [&](const auto& r) {
          return r.backend == b && r.noise_level == level;
        });
        if (it == reports.end()) {
          out << std::setw(18) << "-";
        } else {
          std::ostringstream cell;
          cell << std::fixed << std::setprecision(3) << it->mean.at(metric) << " +/- "
               << it->stdev.at(metric);
          out << std::setw(18) << cell.str();
        }
      }
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace asca
