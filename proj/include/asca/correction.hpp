#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "asca/attack.hpp"

namespace asca {

struct PromptMessage {
  std::string role;  // "system" | "user"
  std::string content;
};

struct FewShotExample {
  std::string noisy;
  std::string clean;
};

// Few-shot prompt following the fixed template. The system message is always
// "You are an expert in correcting typos in sentences."; with an empty
// example list only the final correction instruction is emitted (zero-shot).
// Targets containing newlines are rejected (sentences are single-line by
// corpus contract).
std::vector<PromptMessage> build_fewshot_prompt(
    const std::vector<FewShotExample>& examples, const std::string& target);

class CorrectorBackend {
 public:
  virtual ~CorrectorBackend() = default;
  virtual std::string name() const = 0;
  // Returns the corrected sentence. May throw BackendTimeout,
  // BackendProtocolError, or RateLimited.
  virtual std::string correct(const AttackTranscript& t,
                              const std::vector<FewShotExample>& shots) = 0;
  // Upper bound on concurrent correct() calls the batch driver may issue.
  virtual int max_concurrent() const { return 1; }
};

// Returns ground truth; upper-bounds achievable correction.
std::unique_ptr<CorrectorBackend> make_oracle_backend();

// Returns the noisy prediction unchanged (the uncorrected baseline).
std::unique_ptr<CorrectorBackend> make_echo_backend();

// Replaces each whitespace token with the nearest wordlist entry at edit
// distance <= 1 (ties alphabetical); unmatched tokens pass through.
std::unique_ptr<CorrectorBackend> make_dictionary_backend(std::vector<std::string> wordlist);

struct RemoteConfig {
  std::string base_url;           // e.g. http://localhost:8080
  std::string model;              // model name sent in the request body
  std::string auth_token_env;     // env var holding the bearer token, may be empty
  std::string endpoint_path = "/v1/chat/completions";
  double temperature = 0.0;
  int timeout_s = 30;
  int max_concurrent = 4;
  int max_retries = 3;
  int retry_base_ms = 200;  // exponential backoff base
};

// Chat-completion convention: POST with {model, messages, temperature},
// response read from choices[0].message.content.
std::unique_ptr<CorrectorBackend> make_remote_backend(RemoteConfig cfg);

// Backend response normalization: lowercase, trim, strip a leading
// "corrected:" echo of the template.
std::string normalize_response(std::string text);

// Corrects every transcript in place. k examples are drawn (seeded) from the
// few-shot pool, skipping any pool entry whose truth equals the target
// sentence. Backend failures are recorded in transcript.error; the batch
// never aborts. Work is distributed over min(max_concurrent, batch) threads
// keyed by sentence index, so concurrency does not affect results.
void correct_transcripts(CorrectorBackend& backend,
                         std::vector<AttackTranscript>& transcripts,
                         const std::vector<AttackTranscript>& fewshot_pool, int k,
                         std::uint64_t seed);

}  // namespace asca
