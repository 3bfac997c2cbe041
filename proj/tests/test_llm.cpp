#include <cstdlib>
#include <string>

#include "doctest.h"
#include "mlab/errors.hpp"
#include "mlab/event_log.hpp"
#include "mlab/llm.hpp"
#include "mlab/util.hpp"

using namespace mlab;
using namespace mlab::llm;

TEST_CASE("stub completions are a pure function of the request") {
  StubLLMClient stub;
  LLMRequest req;
  req.system = "You are a test.";
  req.user = "Summarize   this\n\ttext  please";
  std::string a = stub.complete(req);
  std::string b = stub.complete(req);
  CHECK(a == b);

  const std::string tag = to_hex(fnv1a64(req.user, fnv1a64(req.system)));
  CHECK(a == "[stub " + tag + "] Summarize this text please");

  req.system = "Different system prompt.";
  CHECK(stub.complete(req) != a);
  CHECK(stub.name() == "stub");
}

TEST_CASE("stub excerpt collapses whitespace and truncates") {
  StubLLMClient stub;
  LLMRequest req;
  req.user = std::string(500, 'x');
  std::string out = stub.complete(req);
  // "[stub " + 16 hex + "] " + 200 chars
  CHECK(out.size() == 6 + 16 + 2 + 200);
  CHECK(out.substr(out.size() - 200) == std::string(200, 'x'));
}

TEST_CASE("stub appends a decision line when the prompt asks for one") {
  StubLLMClient stub;
  LLMRequest req;
  req.user = "Reason it out, then end with \"Decision: buy\", \"Decision: hold\", "
             "or \"Decision: sell\".";
  std::string out = stub.complete(req);
  static const char* kTokens[] = {"buy", "hold", "sell"};
  const std::string expected =
      std::string("\nDecision: ") + kTokens[fnv1a64(req.user) % 3];
  REQUIRE(out.size() > expected.size());
  CHECK(out.substr(out.size() - expected.size()) == expected);

  // without the literal marker no tail is added
  LLMRequest plain;
  plain.user = "Decide whether to buy or sell.";
  std::string p = stub.complete(plain);
  CHECK(p.find("\nDecision: ") == std::string::npos);
}

TEST_CASE("stub scores every explanation section") {
  StubLLMClient stub;
  LLMRequest req;
  req.user =
      "Rank these.\n"
      "\nExplanation 1:\nStrong earnings and momentum.\n"
      "\nExplanation 2:\nWeak guidance.\n"
      "\nReply with one line per id, formatted exactly as \"<id>: <score>/10\".";
  std::string out = stub.complete(req);
  CHECK(out.find("\n1: ") != std::string::npos);
  CHECK(out.find("\n2: ") != std::string::npos);
  CHECK(out.find("/10") != std::string::npos);
  // deterministic: same prompt, same scores
  CHECK(stub.complete(req) == out);
}

namespace {

struct FlakyClient final : LLMClient {
  int failures_left;
  int calls = 0;
  explicit FlakyClient(int failures) : failures_left(failures) {}
  std::string complete(const LLMRequest&) override {
    ++calls;
    if (failures_left-- > 0) throw TransportError("socket reset", 1);
    return "ok";
  }
  std::string name() const override { return "flaky"; }
};

}  // namespace

TEST_CASE("retry recovers from transient failures") {
  FlakyClient client(2);
  RetryPolicy policy;
  policy.max_attempts = 3;
  policy.base_delay_ms = 0;
  EventLog log;
  LLMRequest req;
  req.user = "hi";
  CHECK(complete_with_retry(client, req, policy, &log) == "ok");
  CHECK(client.calls == 3);
  CHECK(log.warning_count() == 2);
  CHECK(log.events()[0].message.find("transient completion failure, attempt 1") !=
        std::string::npos);
}

TEST_CASE("retry exhaustion rethrows with the attempt count") {
  FlakyClient client(10);
  RetryPolicy policy;
  policy.max_attempts = 3;
  policy.base_delay_ms = 0;
  LLMRequest req;
  req.user = "hi";
  try {
    complete_with_retry(client, req, policy, nullptr);
    FAIL("expected TransportError");
  } catch (const TransportError& e) {
    CHECK(e.attempts() == 3);
    CHECK(std::string(e.what()).find("(after 3 attempts)") != std::string::npos);
  }
  CHECK(client.calls == 3);

  // non-transport errors pass straight through
  struct Broken final : LLMClient {
    std::string complete(const LLMRequest&) override {
      throw ParseError("bad payload");
    }
    std::string name() const override { return "broken"; }
  } broken;
  CHECK_THROWS_AS(complete_with_retry(broken, req, policy, nullptr), ParseError);
}

TEST_CASE("http client reads its key from the environment") {
  unsetenv("MARKETLAB_TEST_KEY");
  CHECK_THROWS_AS(
      HttpLLMClient("https://example.invalid/v1", "m1", "MARKETLAB_TEST_KEY"),
      ConfigError);
  setenv("MARKETLAB_TEST_KEY", "", 1);
  CHECK_THROWS_AS(
      HttpLLMClient("https://example.invalid/v1", "m1", "MARKETLAB_TEST_KEY"),
      ConfigError);
  setenv("MARKETLAB_TEST_KEY", "sk-test", 1);
  HttpLLMClient client("https://example.invalid/v1", "m1", "MARKETLAB_TEST_KEY");
  CHECK(client.name() == "http:m1");
  unsetenv("MARKETLAB_TEST_KEY");
}
