#pragma once

#include <cstddef>
#include <string>

#include "mlab/event_log.hpp"

namespace mlab::llm {

struct LLMRequest {
  std::string system;
  std::string user;
  double temperature = 0.0;
};

// Completion contract for every summarizer and the signal stage. Production
// adapters wrap a network API; the stub below is pure so whole-pipeline runs
// replay byte for byte.
class LLMClient {
 public:
  virtual ~LLMClient() = default;

  // May throw TransportError on transient failure; see complete_with_retry.
  virtual std::string complete(const LLMRequest& request) = 0;

  // Budget for the user prompt, in characters. Builders that can overflow it
  // truncate their oldest material first.
  virtual std::size_t max_prompt_chars() const { return 48000; }

  virtual std::string name() const = 0;
};

// Offline deterministic client. Output is a pure function of the request:
// a digest-tagged excerpt of the prompt, plus whatever structured tail the
// prompt asks for (a decision line, per-id score lines) so downstream
// parsers always have something well-formed to chew on.
class StubLLMClient final : public LLMClient {
 public:
  std::string complete(const LLMRequest& request) override;
  std::string name() const override { return "stub"; }
};

// Network adapter: POSTs {model, system, user, temperature} as JSON to the
// endpoint and expects {"text": ...} back. The API key is read from the
// named environment variable at construction; keys never live in config
// files.
class HttpLLMClient final : public LLMClient {
 public:
  HttpLLMClient(std::string endpoint, std::string model, std::string api_key_env);
  std::string complete(const LLMRequest& request) override;
  std::string name() const override { return "http:" + model_; }

 private:
  std::string endpoint_;
  std::string model_;
  std::string api_key_;
};

struct RetryPolicy {
  int max_attempts = 3;
  int base_delay_ms = 250;  // doubles per attempt; 0 in tests
};

// Retries transient failures with exponential backoff, then rethrows a
// TransportError carrying the attempt count.
std::string complete_with_retry(LLMClient& client, const LLMRequest& request,
                                const RetryPolicy& policy = {},
                                EventLog* log = nullptr);

}  // namespace mlab::llm
