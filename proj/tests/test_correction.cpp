#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "asca/correction.hpp"
#include "asca/errors.hpp"

using namespace asca;
using nlohmann::json;

namespace {

AttackTranscript make_transcript(std::string truth, std::string predicted,
                                 std::string level = "Low") {
  AttackTranscript t;
  t.truth = std::move(truth);
  t.predicted = std::move(predicted);
  t.noise_level = std::move(level);
  return t;
}

}  // namespace

TEST_CASE("build_fewshot_prompt: golden two-shot template") {
  const std::vector<FewShotExample> shots = {
      {"fhe cat sat", "the cat sat"},
      {"dogs bork 42", "dogs bark 42"},
  };
  const auto messages = build_fewshot_prompt(shots, "a noizy sentence");
  REQUIRE(messages.size() == 2);
  CHECK(messages[0].role == "system");
  CHECK(messages[0].content == "You are an expert in correcting typos in sentences.");
  CHECK(messages[1].role == "user");
  const std::string expected =
      "Here are pairs of sentences with typos; learn from them:\n"
      "\n"
      "sentence: fhe cat sat\n"
      "corrected: the cat sat\n"
      "\n"
      "sentence: dogs bork 42\n"
      "corrected: dogs bark 42\n"
      "\n"
      "Now, please correct these sentences and output only the corrected version "
      "with no additional text: a noizy sentence";
  CHECK(messages[1].content == expected);
}

TEST_CASE("build_fewshot_prompt: zero-shot emits only the instruction") {
  const auto messages = build_fewshot_prompt({}, "fix me");
  REQUIRE(messages.size() == 2);
  CHECK(messages[1].content ==
        "Now, please correct these sentences and output only the corrected version "
        "with no additional text: fix me");
}

TEST_CASE("build_fewshot_prompt: input validation") {
  const std::string multiline = "line one\nline two";
  CHECK_THROWS_AS(build_fewshot_prompt({}, multiline), std::invalid_argument);
  const std::vector<FewShotExample> empty_noisy = {{"", "clean"}};
  CHECK_THROWS_AS(build_fewshot_prompt(empty_noisy, "x"), std::invalid_argument);
  const std::vector<FewShotExample> empty_clean = {{"noisy", ""}};
  CHECK_THROWS_AS(build_fewshot_prompt(empty_clean, "x"), std::invalid_argument);
}

TEST_CASE("normalize_response") {
  CHECK(normalize_response("The Cat Sat") == "the cat sat");
  CHECK(normalize_response("  padded  \n") == "padded");
  CHECK(normalize_response("Corrected: the cat sat") == "the cat sat");
  CHECK(normalize_response("corrected:the cat sat") == "the cat sat");
  CHECK(normalize_response("") == "");
  // Only a leading echo of the template is stripped.
  CHECK(normalize_response("this was corrected: by me") == "this was corrected: by me");
}

TEST_CASE("oracle and echo backends") {
  auto oracle = make_oracle_backend();
  auto echo = make_echo_backend();
  CHECK(oracle->name() == "oracle");
  CHECK(echo->name() == "echo");
  const auto t = make_transcript("the cat sat", "fhe caf saf");
  CHECK(oracle->correct(t, {}) == "the cat sat");
  CHECK(echo->correct(t, {}) == "fhe caf saf");
}

TEST_CASE("dictionary backend: distance-1 repair, alphabetical ties, passthrough") {
  auto dict = make_dictionary_backend({"the", "cat", "sat"});
  CHECK(dict->name() == "dictionary");
  CHECK(dict->correct(make_transcript("", "the caf sat"), {}) == "the cat sat");
  // Unmatched token (distance > 1 from every word) passes through.
  CHECK(dict->correct(make_transcript("", "the zzzzz sat"), {}) == "the zzzzz sat");
  // Exact matches are never rewritten even when a neighbor exists.
  auto tie = make_dictionary_backend({"cat", "bat", "rat"});
  CHECK(tie->correct(make_transcript("", "cat"), {}) == "cat");
  // "aat" is distance 1 from bat, cat, rat: alphabetically first wins.
  CHECK(tie->correct(make_transcript("", "aat"), {}) == "bat");
  // Insertions and deletions count as distance 1 too.
  CHECK(tie->correct(make_transcript("", "cta at"), {}) == "cta bat");
  auto small = make_dictionary_backend({"word"});
  CHECK(small->correct(make_transcript("", "wrd wordd word"), {}) == "word word word");
  // Empty input stays empty.
  CHECK(small->correct(make_transcript("", ""), {}) == "");
}

TEST_CASE("correct_transcripts: oracle fills corrected, clears errors") {
  std::vector<AttackTranscript> ts = {
      make_transcript("the cat sat", "fhe cat sat"),
      make_transcript("dogs bark 42", "dogs bork 42"),
  };
  ts[0].error = "stale";
  auto oracle = make_oracle_backend();
  correct_transcripts(*oracle, ts, ts, 1, 5);
  for (const auto& t : ts) {
    REQUIRE(t.corrected.has_value());
    CHECK(*t.corrected == t.truth);
    CHECK(!t.error.has_value());
  }
}

TEST_CASE("correct_transcripts: failures are recorded per sentence, batch completes") {
  struct Flaky final : CorrectorBackend {
    std::string name() const override { return "flaky"; }
    std::string correct(const AttackTranscript& t,
                        const std::vector<FewShotExample>&) override {
      if (t.truth == "boom") throw BackendProtocolError("synthetic failure");
      return t.truth;
    }
  };
  std::vector<AttackTranscript> ts = {
      make_transcript("fine one", "fine one"),
      make_transcript("boom", "boom"),
      make_transcript("fine two", "fine two"),
  };
  Flaky flaky;
  correct_transcripts(flaky, ts, {}, 0, 1);
  CHECK(ts[0].corrected == "fine one");
  CHECK(ts[2].corrected == "fine two");
  CHECK(!ts[1].corrected.has_value());
  REQUIRE(ts[1].error.has_value());
  CHECK(ts[1].error->find("synthetic failure") != std::string::npos);
}

TEST_CASE("correct_transcripts: no leakage and k examples reach the backend") {
  struct Spy final : CorrectorBackend {
    std::vector<std::vector<FewShotExample>> seen;
    std::string name() const override { return "spy"; }
    std::string correct(const AttackTranscript& t,
                        const std::vector<FewShotExample>& shots) override {
      seen.push_back(shots);
      return t.predicted;
    }
  };
  std::vector<AttackTranscript> ts;
  for (int i = 0; i < 6; ++i) {
    ts.push_back(make_transcript("truth " + std::to_string(i), "noisy " + std::to_string(i)));
  }
  Spy spy;
  correct_transcripts(spy, ts, ts, 3, 9);
  REQUIRE(spy.seen.size() == 6);
  for (std::size_t i = 0; i < spy.seen.size(); ++i) {
    CHECK(spy.seen[i].size() == 3);
    for (const auto& shot : spy.seen[i]) {
      CHECK(shot.clean != ts[i].truth);  // the target sentence is never its own example
    }
  }
  // A pool smaller than k yields as many examples as are available.
  Spy starved;
  std::vector<AttackTranscript> two = {ts[0], ts[1]};
  correct_transcripts(starved, two, two, 5, 9);
  CHECK(starved.seen[0].size() == 1);
}

TEST_CASE("correct_transcripts: concurrency does not change the outcome") {
  struct Threaded final : CorrectorBackend {
    int workers;
    std::atomic<int> in_flight{0};
    std::atomic<int> peak{0};
    explicit Threaded(int w) : workers(w) {}
    std::string name() const override { return "threaded"; }
    int max_concurrent() const override { return workers; }
    std::string correct(const AttackTranscript& t,
                        const std::vector<FewShotExample>& shots) override {
      const int now = ++in_flight;
      int seen = peak.load();
      while (now > seen && !peak.compare_exchange_weak(seen, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
      --in_flight;
      // Output depends on the sentence and its shots, so ordering bugs show up.
      std::string out = t.predicted;
      for (const auto& s : shots) out += "|" + s.noisy;
      return out;
    }
  };
  std::vector<AttackTranscript> base;
  for (int i = 0; i < 24; ++i) {
    base.push_back(make_transcript("truth " + std::to_string(i), "noisy " + std::to_string(i)));
  }
  auto serial = base;
  auto parallel = base;
  Threaded one(1), eight(8);
  correct_transcripts(one, serial, base, 2, 13);
  correct_transcripts(eight, parallel, base, 2, 13);
  CHECK(eight.peak.load() > 1);
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(serial[i].corrected == parallel[i].corrected);
  }
}

TEST_CASE("remote backend against a mock chat-completion server") {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string last_auth;
  json last_body;
  std::mutex mu;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard<std::mutex> lock(mu);
    ++hits;
    last_auth = req.get_header_value("Authorization");
    last_body = json::parse(req.body);
    json out;
    out["choices"] = json::array(
        {json{{"message", json{{"content", "Corrected: The Cat Sat"}}}}});
    res.set_content(out.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  setenv("ASCA_TEST_TOKEN", "sekrit", 1);
  RemoteConfig cfg;
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
  cfg.model = "test-model";
  cfg.auth_token_env = "ASCA_TEST_TOKEN";
  cfg.temperature = 0.0;
  cfg.max_retries = 1;
  cfg.retry_base_ms = 10;
  auto remote = make_remote_backend(cfg);
  CHECK(remote->name() == "remote:test-model");

  std::vector<AttackTranscript> ts = {make_transcript("the cat sat", "fhe cat sat")};
  correct_transcripts(*remote, ts, ts, 0, 1);
  REQUIRE(ts[0].corrected.has_value());
  CHECK(*ts[0].corrected == "the cat sat");  // normalized: lowercased, prefix stripped
  CHECK(hits.load() == 1);
  {
    std::lock_guard<std::mutex> lock(mu);
    CHECK(last_auth == "Bearer sekrit");
    CHECK(last_body.at("model") == "test-model");
    CHECK(last_body.at("temperature") == 0.0);
    REQUIRE(last_body.at("messages").size() == 2);
    CHECK(last_body.at("messages")[0].at("role") == "system");
    CHECK(last_body.at("messages")[1].at("content").get<std::string>().find("fhe cat sat") !=
          std::string::npos);
  }

  server.stop();
  server_thread.join();
}

TEST_CASE("remote backend: rate limiting retries then surfaces RateLimited") {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 429;
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  RemoteConfig cfg;
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
  cfg.model = "m";
  cfg.max_retries = 2;
  cfg.retry_base_ms = 5;
  auto remote = make_remote_backend(cfg);
  const auto t = make_transcript("x", "x");
  CHECK_THROWS_AS(remote->correct(t, {}), RateLimited);
  CHECK(hits.load() == 3);  // initial call plus two retries

  server.stop();
  server_thread.join();
}

TEST_CASE("remote backend: recovery after transient 429") {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    if (++hits == 1) {
      res.status = 429;
      return;
    }
    json out;
    out["choices"] = json::array({json{{"message", json{{"content", "ok now"}}}}});
    res.set_content(out.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  RemoteConfig cfg;
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
  cfg.model = "m";
  cfg.max_retries = 3;
  cfg.retry_base_ms = 5;
  auto remote = make_remote_backend(cfg);
  const auto t = make_transcript("x", "x");
  CHECK(remote->correct(t, {}) == "ok now");
  CHECK(hits.load() == 2);

  server.stop();
  server_thread.join();
}

TEST_CASE("remote backend: malformed payloads raise BackendProtocolError") {
  httplib::Server server;
  std::atomic<int> mode{0};
  server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    if (mode.load() == 0) {
      res.set_content("this is not json", "application/json");
    } else if (mode.load() == 1) {
      res.set_content(R"({"unexpected": "shape"})", "application/json");
    } else {
      res.status = 500;
      res.set_content("server error", "text/plain");
    }
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  RemoteConfig cfg;
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
  cfg.model = "m";
  cfg.max_retries = 0;
  auto remote = make_remote_backend(cfg);
  const auto t = make_transcript("x", "x");
  CHECK_THROWS_AS(remote->correct(t, {}), BackendProtocolError);
  mode = 1;
  CHECK_THROWS_AS(remote->correct(t, {}), BackendProtocolError);
  mode = 2;
  CHECK_THROWS_AS(remote->correct(t, {}), BackendProtocolError);

  server.stop();
  server_thread.join();
}

TEST_CASE("remote backend: unreachable server raises BackendTimeout") {
  RemoteConfig cfg;
  cfg.base_url = "http://127.0.0.1:1";  // nothing listens here
  cfg.model = "m";
  cfg.timeout_s = 1;
  cfg.max_retries = 0;
  auto remote = make_remote_backend(cfg);
  const auto t = make_transcript("x", "x");
  CHECK_THROWS_AS(remote->correct(t, {}), BackendTimeout);
  RemoteConfig bad;
  CHECK_THROWS_AS(make_remote_backend(bad), std::invalid_argument);
}
