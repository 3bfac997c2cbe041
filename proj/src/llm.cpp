#include "mlab/llm.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "mlab/errors.hpp"
#include "mlab/util.hpp"

namespace mlab::llm {

namespace {

// Whitespace-collapsed excerpt of the prompt body; keeps stub completions
// readable in stored summaries.
std::string excerpt(const std::string& text, std::size_t limit) {
  std::string out;
  bool in_ws = true;
  for (char c : text) {
    bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r';
    if (ws) {
      if (!in_ws) out.push_back(' ');
      in_ws = true;
    } else {
      out.push_back(c);
      in_ws = false;
    }
    if (out.size() >= limit) break;
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

// Markers emitted by the prompt builders; the stub keys its structured
// output off them.
constexpr const char* kDecisionMarker = "\"Decision: buy\"";
constexpr const char* kScoreMarker = "\"<id>: <score>/10\"";

std::string stub_decision_tail(const std::string& user) {
  static const char* kTokens[] = {"buy", "hold", "sell"};
  return std::string("\nDecision: ") + kTokens[fnv1a64(user) % 3];
}

std::string stub_score_lines(const std::string& user) {
  // Sections look like "Explanation <id>:\n<body>"; score each body.
  std::string out;
  std::size_t pos = 0;
  const std::string head = "Explanation ";
  while ((pos = user.find(head, pos)) != std::string::npos) {
    std::size_t id_begin = pos + head.size();
    std::size_t colon = user.find(':', id_begin);
    if (colon == std::string::npos) break;
    std::string id = user.substr(id_begin, colon - id_begin);
    std::size_t body_end = user.find("\nExplanation ", colon);
    if (body_end == std::string::npos) body_end = user.size();
    std::string body = user.substr(colon + 1, body_end - colon - 1);
    out += "\n" + id + ": " + std::to_string(fnv1a64(body) % 11) + "/10";
    pos = body_end;
  }
  return out;
}

}  // namespace

std::string StubLLMClient::complete(const LLMRequest& request) {
  std::string tag = to_hex(fnv1a64(request.user, fnv1a64(request.system)));
  std::string out = "[stub " + tag + "] " + excerpt(request.user, 200);
  if (request.user.find(kScoreMarker) != std::string::npos)
    out += stub_score_lines(request.user);
  else if (request.user.find(kDecisionMarker) != std::string::npos)
    out += stub_decision_tail(request.user);
  return out;
}

HttpLLMClient::HttpLLMClient(std::string endpoint, std::string model,
                             std::string api_key_env)
    : endpoint_(std::move(endpoint)), model_(std::move(model)) {
  const char* key = api_key_env.empty() ? nullptr : std::getenv(api_key_env.c_str());
  if (key == nullptr || *key == '\0')
    throw ConfigError("environment variable '" + api_key_env +
                      "' named by api_key_env is not set");
  api_key_ = key;
}

std::string HttpLLMClient::complete(const LLMRequest& request) {
  const std::size_t scheme = endpoint_.find("://");
  if (scheme == std::string::npos)
    throw ConfigError("endpoint '" + endpoint_ + "' has no scheme");
  const std::size_t slash = endpoint_.find('/', scheme + 3);
  const std::string base =
      slash == std::string::npos ? endpoint_ : endpoint_.substr(0, slash);
  const std::string path = slash == std::string::npos ? "/" : endpoint_.substr(slash);

  nlohmann::ordered_json body{{"model", model_},
                              {"system", request.system},
                              {"user", request.user},
                              {"temperature", request.temperature}};
  httplib::Client client(base);
  httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) throw TransportError("no response from " + endpoint_, 1);
  if (res->status != 200)
    throw TransportError("HTTP " + std::to_string(res->status) + " from " + endpoint_,
                         1);
  try {
    return nlohmann::json::parse(res->body).at("text").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed completion response: " + std::string(e.what()));
  }
}

std::string complete_with_retry(LLMClient& client, const LLMRequest& request,
                                const RetryPolicy& policy, EventLog* log) {
  int attempts = 0;
  int delay_ms = policy.base_delay_ms;
  while (true) {
    ++attempts;
    try {
      return client.complete(request);
    } catch (const TransportError& e) {
      if (attempts >= policy.max_attempts)
        throw TransportError(std::string(e.what()) + " (after " +
                                 std::to_string(attempts) + " attempts)",
                             attempts);
      log_warn(log, "transient completion failure, attempt " +
                        std::to_string(attempts) + ": " + e.what());
      if (delay_ms > 0)
        std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
      delay_ms *= 2;
    }
  }
}

}  // namespace mlab::llm
