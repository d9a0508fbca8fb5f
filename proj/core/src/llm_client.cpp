#include "reagan/llm_client.hpp"

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "reagan/errors.hpp"
#include "reagan/text_util.hpp"

namespace reagan {

std::string backend_kind_name(BackendKind kind) {
    switch (kind) {
    case BackendKind::Http: return "http";
    case BackendKind::Scripted: return "scripted";
    case BackendKind::Replay: return "replay";
    }
    return "scripted";
}

std::optional<BackendKind> backend_kind_from_name(const std::string& name) {
    if (name == "http") return BackendKind::Http;
    if (name == "scripted") return BackendKind::Scripted;
    if (name == "replay") return BackendKind::Replay;
    return std::nullopt;
}

std::optional<RequestTagParts> parse_request_tag(const std::string& tag) {
    if (tag.size() < 2 || tag[0] != 'n') return std::nullopt;
    std::size_t i = 1;
    while (i < tag.size() && std::isdigit(static_cast<unsigned char>(tag[i]))) ++i;
    if (i == 1 || i >= tag.size() || tag[i] != '.') return std::nullopt;

    RequestTagParts parts;
    parts.node = std::stoll(tag.substr(1, i - 1));
    std::size_t rest = i + 1;

    // optional "l{digits}." layer segment
    if (rest < tag.size() && tag[rest] == 'l') {
        std::size_t j = rest + 1;
        while (j < tag.size() && std::isdigit(static_cast<unsigned char>(tag[j]))) ++j;
        if (j > rest + 1 && j < tag.size() && tag[j] == '.') {
            parts.layer = std::stoi(tag.substr(rest + 1, j - rest - 1));
            rest = j + 1;
        }
    }
    if (rest >= tag.size()) return std::nullopt;
    parts.purpose = tag.substr(rest);
    return parts;
}

std::string make_layer_tag(NodeId v, int layer, const std::string& purpose) {
    return "n" + std::to_string(v) + ".l" + std::to_string(layer) + "." + purpose;
}

std::string make_predict_tag(NodeId v, bool retry) {
    std::string tag = "n" + std::to_string(v) + ".predict";
    if (retry) tag += ".retry";
    return tag;
}

BoundedGate::BoundedGate(int limit) : available_(limit > 0 ? limit : 1) {}

void BoundedGate::acquire() {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [this] { return available_ > 0; });
    --available_;
}

void BoundedGate::release() {
    {
        std::lock_guard<std::mutex> lock(mu_);
        ++available_;
    }
    cv_.notify_one();
}

TranscriptLogger::TranscriptLogger(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot write transcript " + path);
    nlohmann::ordered_json header;
    header["format"] = "reagan.transcript";
    header["version"] = kFormatVersion;
    out_ << header.dump() << "\n";
    out_.flush();
}

void TranscriptLogger::record(const ChatRequest& request, const std::string& response,
                              int attempts, const std::string& backend) {
    nlohmann::ordered_json row;
    row["tag"] = request.request_tag;
    row["system"] = request.system_text;
    row["user"] = request.user_text;
    row["response"] = response;
    row["attempts"] = attempts;
    row["backend"] = backend;
    std::lock_guard<std::mutex> lock(mu_);
    out_ << row.dump() << "\n";
    out_.flush();
}

namespace {

// endpoint may carry a path prefix (e.g. http://host:8000/v1); httplib
// clients want scheme://host:port separately from the path
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    std::string base = endpoint;
    while (!base.empty() && base.back() == '/') base.pop_back();
    std::size_t scheme = base.find("://");
    std::size_t path_start = scheme == std::string::npos ? base.find('/')
                                                         : base.find('/', scheme + 3);
    if (path_start == std::string::npos) return {base, ""};
    return {base.substr(0, path_start), base.substr(path_start)};
}

bool timeout_error(httplib::Error err) {
    return err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
           err == httplib::Error::Write;
}

} // namespace

HttpChatBackend::HttpChatBackend(BackendConfig config, TranscriptLogger* logger)
    : config_(std::move(config)), logger_(logger), gate_(config_.max_in_flight) {
    if (config_.endpoint_url.empty()) {
        throw ConfigError("http backend requires an endpoint url");
    }
}

std::string HttpChatBackend::complete(const ChatRequest& request) {
    if (request.system_text.empty() || request.user_text.empty()) {
        throw Error("chat request texts must be nonempty");
    }
    GatePass pass(gate_);

    nlohmann::ordered_json body;
    body["model"] = config_.model_name;
    body["messages"] = nlohmann::ordered_json::array(
        {nlohmann::ordered_json{{"role", "system"}, {"content", request.system_text}},
         nlohmann::ordered_json{{"role", "user"}, {"content", request.user_text}}});
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_output_tokens;
    std::string payload = body.dump();

    auto [base, prefix] = split_endpoint(config_.endpoint_url);
    const char* api_key = std::getenv("REAGAN_LLM_API_KEY");

    int attempts = 0;
    bool last_was_timeout = false;
    std::string last_failure;
    while (attempts <= config_.retry_limit) {
        ++attempts;
        httplib::Client client(base);
        client.set_connection_timeout(config_.timeout_ms / 1000,
                                      (config_.timeout_ms % 1000) * 1000);
        client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
        httplib::Headers headers;
        if (api_key != nullptr && *api_key != '\0') {
            headers.emplace("Authorization", std::string("Bearer ") + api_key);
        }
        auto res = client.Post(prefix + "/chat/completions", headers, payload,
                               "application/json");
        if (!res) {
            last_was_timeout = timeout_error(res.error());
            last_failure = httplib::to_string(res.error());
        } else if (res->status >= 500 || res->status == 429) {
            last_was_timeout = false;
            last_failure = "status " + std::to_string(res->status);
        } else if (res->status != 200) {
            throw HttpStatus(res->status, res->body);
        } else {
            nlohmann::json parsed;
            try {
                parsed = nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::exception& e) {
                throw MalformedResponseBody(e.what());
            }
            if (!parsed.contains("choices") || !parsed["choices"].is_array() ||
                parsed["choices"].empty() || !parsed["choices"][0].contains("message") ||
                !parsed["choices"][0]["message"].contains("content") ||
                !parsed["choices"][0]["message"]["content"].is_string()) {
                throw MalformedResponseBody("missing choices[0].message.content");
            }
            std::string content = parsed["choices"][0]["message"]["content"].get<std::string>();
            if (logger_ != nullptr) logger_->record(request, content, attempts, "http");
            return content;
        }
        if (attempts <= config_.retry_limit) {
            int delay = config_.backoff_base_ms << (attempts - 1);
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
    }
    if (last_was_timeout) {
        throw Timeout(request.request_tag + ": " + last_failure);
    }
    throw RetriesExhausted(request.request_tag + ": " + std::to_string(attempts) +
                           " attempts failed, last: " + last_failure);
}

bool PromptMatcher::matches(const ChatRequest& request) const {
    if (purpose || layer) {
        auto parts = parse_request_tag(request.request_tag);
        if (!parts) return false;
        if (purpose) {
            const std::string& p = parts->purpose;
            if (p.compare(0, purpose->size(), *purpose) != 0) return false;
            if (p.size() > purpose->size() && p[purpose->size()] != '.') return false;
        }
        if (layer && parts->layer != *layer) return false;
    }
    if (user_contains && request.user_text.find(*user_contains) == std::string::npos) {
        return false;
    }
    return true;
}

namespace responders {

Responder constant(std::string text) {
    return [text = std::move(text)](const ChatRequest&) { return text; };
}

Responder majority_label() {
    return [](const ChatRequest& request) {
        const std::string& text = request.user_text;
        std::size_t begin = text.find("Labeled Examples in Memory:");
        std::string region;
        if (begin == std::string::npos) {
            region = text;
        } else {
            std::size_t end = text.find("Your task is to choose", begin);
            if (end == std::string::npos) end = text.find("Planning Your Steps:", begin);
            region = text.substr(begin, end == std::string::npos ? std::string::npos
                                                                 : end - begin);
        }

        std::map<std::string, int> counts;
        std::size_t pos = 0;
        while (pos < region.size()) {
            std::size_t eol = region.find('\n', pos);
            if (eol == std::string::npos) eol = region.size();
            std::string line = region.substr(pos, eol - pos);
            pos = eol + 1;
            if (line.rfind("- ", 0) != 0) continue;
            std::size_t sep = line.find(": \"");
            if (sep == std::string::npos) continue;
            std::string name = trim(line.substr(2, sep - 2));
            if (!name.empty()) ++counts[name];
        }

        std::string best = "unknown";
        int best_count = 0;
        for (const auto& [name, count] : counts) {
            if (count > best_count) { // map order gives lexicographic tie-break
                best = name;
                best_count = count;
            }
        }
        return std::string("{\"action_type\": \"predict\", \"predicted_label\": \"") + best +
               "\"}";
    };
}

} // namespace responders

ScriptedBackend::ScriptedBackend(ScriptedPolicy policy, TranscriptLogger* logger)
    : policy_(std::move(policy)), logger_(logger) {
    if (!policy_.default_response) {
        throw ConfigError("scripted policy requires a default response");
    }
}

std::string ScriptedBackend::complete(const ChatRequest& request) {
    std::string response;
    bool matched = false;
    for (const ScriptedRule& rule : policy_.rules) {
        if (rule.matcher.matches(request)) {
            response = rule.respond(request);
            matched = true;
            break;
        }
    }
    if (!matched) response = policy_.default_response(request);
    if (logger_ != nullptr) logger_->record(request, response, 1, "scripted");
    return response;
}

ReplayBackend::ReplayBackend(const std::string& transcript_path, TranscriptLogger* logger)
    : logger_(logger) {
    std::ifstream in(transcript_path, std::ios::binary);
    if (!in) throw IoError("cannot open transcript " + transcript_path);
    std::string line;
    bool saw_header = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw TranscriptFormat(transcript_path + ":" + std::to_string(line_no) + ": " +
                                   e.what());
        }
        if (!saw_header) {
            if (!row.contains("format") || row["format"] != "reagan.transcript") {
                throw TranscriptFormat(transcript_path + ": missing transcript header");
            }
            saw_header = true;
            continue;
        }
        if (!row.contains("tag") || !row.contains("response")) {
            throw TranscriptFormat(transcript_path + ":" + std::to_string(line_no) +
                                   ": row missing tag/response");
        }
        responses_[row["tag"].get<std::string>()] = row["response"].get<std::string>();
    }
    if (!saw_header) throw TranscriptFormat(transcript_path + ": empty transcript");
}

std::string ReplayBackend::complete(const ChatRequest& request) {
    auto it = responses_.find(request.request_tag);
    if (it == responses_.end()) {
        throw ReplayMiss("no recorded response for tag " + request.request_tag);
    }
    if (logger_ != nullptr) logger_->record(request, it->second, 1, "replay");
    return it->second;
}

} // namespace reagan
