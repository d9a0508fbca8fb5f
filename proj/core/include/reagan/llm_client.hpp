#pragma once

#include <condition_variable>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "reagan/types.hpp"

namespace reagan {

struct ChatRequest {
    std::string system_text;
    std::string user_text;
    int max_output_tokens = 512;
    double temperature = 0.0;
    // "n{id}.l{layer}.{purpose}" for layer work, "n{id}.predict" /
    // "n{id}.predict.retry" for prediction.
    std::string request_tag;
};

enum class BackendKind { Http, Scripted, Replay };

std::string backend_kind_name(BackendKind kind);
std::optional<BackendKind> backend_kind_from_name(const std::string& name);

struct BackendConfig {
    BackendKind kind = BackendKind::Scripted;
    std::string endpoint_url;
    std::string model_name = "Qwen2.5-14B-Instruct";
    int max_in_flight = 4;
    int timeout_ms = 30000;
    int retry_limit = 3;
    int backoff_base_ms = 100;
    std::string replay_path; // transcript to serve when kind is Replay
};

struct RequestTagParts {
    NodeId node = -1;
    std::optional<int> layer;
    std::string purpose;
};

std::optional<RequestTagParts> parse_request_tag(const std::string& tag);

std::string make_layer_tag(NodeId v, int layer, const std::string& purpose);
std::string make_predict_tag(NodeId v, bool retry = false);

// Caps concurrent backend calls process-wide for one backend instance.
class BoundedGate {
public:
    explicit BoundedGate(int limit);
    void acquire();
    void release();

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int available_;
};

class GatePass {
public:
    explicit GatePass(BoundedGate& gate) : gate_(gate) { gate_.acquire(); }
    ~GatePass() { gate_.release(); }
    GatePass(const GatePass&) = delete;
    GatePass& operator=(const GatePass&) = delete;

private:
    BoundedGate& gate_;
};

// JSON Lines request/response log. First line is a format header; each call
// appends one row keyed by request_tag. Thread safe.
class TranscriptLogger {
public:
    explicit TranscriptLogger(const std::string& path);

    void record(const ChatRequest& request, const std::string& response, int attempts,
                const std::string& backend);

    static constexpr int kFormatVersion = 1;

private:
    std::mutex mu_;
    std::ofstream out_;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
};

// POST {endpoint}/chat/completions, retrying transient failures (5xx, 429,
// connection errors, timeouts) with exponential backoff. Reads the API key
// from REAGAN_LLM_API_KEY when set.
class HttpChatBackend : public ChatBackend {
public:
    explicit HttpChatBackend(BackendConfig config, TranscriptLogger* logger = nullptr);

    std::string complete(const ChatRequest& request) override;

private:
    BackendConfig config_;
    TranscriptLogger* logger_;
    BoundedGate gate_;
};

// Matches a request by tag purpose (prefix on a "." boundary), tag layer,
// and/or a user-text substring. Empty matcher matches everything.
struct PromptMatcher {
    std::optional<std::string> purpose;
    std::optional<int> layer;
    std::optional<std::string> user_contains;

    bool matches(const ChatRequest& request) const;
};

using Responder = std::function<std::string(const ChatRequest&)>;

struct ScriptedRule {
    PromptMatcher matcher;
    Responder respond;
};

// First matching rule wins; default_response keeps the policy total.
struct ScriptedPolicy {
    std::vector<ScriptedRule> rules;
    Responder default_response;
};

namespace responders {

Responder constant(std::string text);

// Counts the `- <label>: "` example lines in the prompt and predicts the
// majority label; ties broken by higher count then lexicographic name.
// Prompts with no example lines get the literal label "unknown".
Responder majority_label();

} // namespace responders

class ScriptedBackend : public ChatBackend {
public:
    explicit ScriptedBackend(ScriptedPolicy policy, TranscriptLogger* logger = nullptr);

    std::string complete(const ChatRequest& request) override;

private:
    ScriptedPolicy policy_;
    TranscriptLogger* logger_;
};

// Serves responses recorded in a transcript, looked up by request_tag.
class ReplayBackend : public ChatBackend {
public:
    explicit ReplayBackend(const std::string& transcript_path, TranscriptLogger* logger = nullptr);

    std::string complete(const ChatRequest& request) override;

private:
    std::map<std::string, std::string> responses_;
    TranscriptLogger* logger_;
};

} // namespace reagan
