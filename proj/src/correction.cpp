#include "asca/correction.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "asca/errors.hpp"
#include "asca/rng.hpp"

namespace asca {

using nlohmann::json;

std::vector<PromptMessage> build_fewshot_prompt(
    const std::vector<FewShotExample>& examples, const std::string& target) {
  if (target.find('\n') != std::string::npos) {
    throw std::invalid_argument("build_fewshot_prompt: target must be single-line");
  }
  for (const auto& ex : examples) {
    if (ex.noisy.empty() || ex.clean.empty()) {
      throw std::invalid_argument("build_fewshot_prompt: empty few-shot example");
    }
  }

  std::ostringstream user;
  if (!examples.empty()) {
    user << "Here are pairs of sentences with typos; learn from them:\n";
    for (const auto& ex : examples) {
      user << "\nsentence: " << ex.noisy << "\ncorrected: " << ex.clean << "\n";
    }
    user << "\n";
  }
  user << "Now, please correct these sentences and output only the corrected "
          "version with no additional text: "
       << target;

  return {{"system", "You are an expert in correcting typos in sentences."},
          {"user", user.str()}};
}

std::string normalize_response(std::string text) {
  for (char& c : text) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  std::size_t begin = 0, end = text.size();
  while (begin < end && is_space(text[begin])) ++begin;
  while (end > begin && is_space(text[end - 1])) --end;
  std::string out = text.substr(begin, end - begin);
  constexpr std::string_view prefix = "corrected:";
  if (out.starts_with(prefix)) {
    out.erase(0, prefix.size());
    while (!out.empty() && is_space(out.front())) out.erase(0, 1);
  }
  return out;
}

namespace {

class OracleBackend final : public CorrectorBackend {
 public:
  std::string name() const override { return "oracle"; }
  std::string correct(const AttackTranscript& t,
                      const std::vector<FewShotExample>&) override {
    return t.truth;
  }
};

class EchoBackend final : public CorrectorBackend {
 public:
  std::string name() const override { return "echo"; }
  std::string correct(const AttackTranscript& t,
                      const std::vector<FewShotExample>&) override {
    return t.predicted;
  }
};

bool within_edit_distance_1(const std::string& a, const std::string& b) {
  const std::size_t la = a.size(), lb = b.size();
  if (la > lb + 1 || lb > la + 1) return false;
  if (la == lb) {
    int diff = 0;
    for (std::size_t i = 0; i < la; ++i) {
      if (a[i] != b[i] && ++diff > 1) return false;
    }
    return true;
  }
  const std::string& s = la < lb ? a : b;  // shorter
  const std::string& l = la < lb ? b : a;
  std::size_t i = 0, j = 0;
  bool skipped = false;
  while (i < s.size() && j < l.size()) {
    if (s[i] == l[j]) {
      ++i;
      ++j;
    } else {
      if (skipped) return false;
      skipped = true;
      ++j;
    }
  }
  return true;
}

class DictionaryBackend final : public CorrectorBackend {
 public:
  explicit DictionaryBackend(std::vector<std::string> wordlist)
      : words_(std::move(wordlist)) {
    std::sort(words_.begin(), words_.end());
    words_.erase(std::unique(words_.begin(), words_.end()), words_.end());
  }

  std::string name() const override { return "dictionary"; }

  std::string correct(const AttackTranscript& t,
                      const std::vector<FewShotExample>&) override {
    std::istringstream in(t.predicted);
    std::ostringstream out;
    std::string token;
    bool first = true;
    while (in >> token) {
      if (!first) out << ' ';
      first = false;
      out << fix_token(token);
    }
    return out.str();
  }

 private:
  // Exact match wins; otherwise the alphabetically first word at distance 1.
  std::string fix_token(const std::string& token) const {
    if (std::binary_search(words_.begin(), words_.end(), token)) return token;
    for (const auto& w : words_) {
      if (within_edit_distance_1(token, w)) return w;
    }
    return token;
  }

  std::vector<std::string> words_;
};

class RemoteBackend final : public CorrectorBackend {
 public:
  explicit RemoteBackend(RemoteConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.base_url.empty()) {
      throw std::invalid_argument("remote backend: base_url is required");
    }
  }

  std::string name() const override { return "remote:" + cfg_.model; }
  int max_concurrent() const override { return cfg_.max_concurrent; }

  std::string correct(const AttackTranscript& t,
                      const std::vector<FewShotExample>& shots) override {
    const auto messages = build_fewshot_prompt(shots, t.predicted);
    json body;
    body["model"] = cfg_.model;
    body["temperature"] = cfg_.temperature;
    body["messages"] = json::array();
    for (const auto& m : messages) {
      body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    }

    for (int attempt = 0;; ++attempt) {
      try {
        return request_once(body.dump());
      } catch (const RateLimited&) {
        if (attempt >= cfg_.max_retries) throw;
      } catch (const BackendTimeout&) {
        if (attempt >= cfg_.max_retries) throw;
      }
      std::this_thread::sleep_for(
          std::chrono::milliseconds(cfg_.retry_base_ms << attempt));
    }
  }

 private:
  std::string request_once(const std::string& body) const {
    httplib::Client client(cfg_.base_url);
    client.set_connection_timeout(cfg_.timeout_s);
    client.set_read_timeout(cfg_.timeout_s);
    httplib::Headers headers;
    if (!cfg_.auth_token_env.empty()) {
      if (const char* token = std::getenv(cfg_.auth_token_env.c_str())) {
        headers.emplace("Authorization", std::string("Bearer ") + token);
      }
    }
    const auto res = client.Post(cfg_.endpoint_path, headers, body, "application/json");
    if (!res) throw BackendTimeout("remote backend: no response from " + cfg_.base_url);
    if (res->status == 429) throw RateLimited("remote backend: rate limited");
    if (res->status != 200) {
      throw BackendProtocolError("remote backend: HTTP " + std::to_string(res->status));
    }
    try {
      const json j = json::parse(res->body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw BackendProtocolError(std::string("remote backend: malformed response: ") +
                                 e.what());
    }
  }

  RemoteConfig cfg_;
};

std::vector<FewShotExample> select_shots(const std::vector<AttackTranscript>& pool,
                                         const AttackTranscript& target, int k,
                                         std::uint64_t seed) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].truth != target.truth) candidates.push_back(i);  // no leakage
  }
  Rng rng(seed);
  for (std::size_t i = candidates.size(); i > 1; --i) {
    std::swap(candidates[i - 1], candidates[static_cast<std::size_t>(rng.uniform_int(
                  0, static_cast<std::int64_t>(i) - 1))]);
  }
  std::vector<FewShotExample> shots;
  for (std::size_t i = 0; i < candidates.size() && static_cast<int>(shots.size()) < k; ++i) {
    const auto& p = pool[candidates[i]];
    shots.push_back({p.predicted, p.truth});
  }
  return shots;
}

}  // namespace

std::unique_ptr<CorrectorBackend> make_oracle_backend() {
  return std::make_unique<OracleBackend>();
}

std::unique_ptr<CorrectorBackend> make_echo_backend() {
  return std::make_unique<EchoBackend>();
}

std::unique_ptr<CorrectorBackend> make_dictionary_backend(std::vector<std::string> wordlist) {
  return std::make_unique<DictionaryBackend>(std::move(wordlist));
}

std::unique_ptr<CorrectorBackend> make_remote_backend(RemoteConfig cfg) {
  return std::make_unique<RemoteBackend>(std::move(cfg));
}

void correct_transcripts(CorrectorBackend& backend,
                         std::vector<AttackTranscript>& transcripts,
                         const std::vector<AttackTranscript>& fewshot_pool, int k,
                         std::uint64_t seed) {
  const int workers = std::max(1, std::min<int>(backend.max_concurrent(),
                                                static_cast<int>(transcripts.size())));
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= transcripts.size()) return;
      auto& t = transcripts[i];
      // Per-sentence shot selection seeded by index: identical regardless of
      // which worker picks the sentence up.
      const auto shots = select_shots(fewshot_pool, t, k, Rng::derive(seed, i));
      try {
        t.corrected = normalize_response(backend.correct(t, shots));
        t.error.reset();
      } catch (const std::exception& e) {
        t.corrected.reset();
        t.error = e.what();
      }
    }
  };
  if (workers == 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace asca
