#include "reagan/embedding.hpp"

#include <cctype>
#include <chrono>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "reagan/errors.hpp"
#include "reagan/text_util.hpp"

namespace reagan {

EmbeddingVector EmbeddingProvider::embed_one(const std::string& text) {
    std::vector<EmbeddingVector> out = embed({text});
    if (out.size() != 1) throw EmbedderFailure("provider returned wrong batch size");
    return std::move(out[0]);
}

HashEmbedder::HashEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim_ == 0) throw EmbedderFailure("embedding dimension must be positive");
}

std::string HashEmbedder::model_name() const {
    return "hash-" + std::to_string(dim_) + "-" + std::to_string(seed_);
}

std::vector<EmbeddingVector> HashEmbedder::embed(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const std::string& text : texts) {
        std::vector<float> values(dim_, 0.0f);
        std::string token;
        bool any = false;
        auto flush = [&] {
            if (token.empty()) return;
            std::uint64_t h = fnv1a64(token) ^ seed_;
            std::size_t bucket = static_cast<std::size_t>(h % dim_);
            float sign = ((h >> 32) & 1) ? 1.0f : -1.0f;
            values[bucket] += sign;
            any = true;
            token.clear();
        };
        for (char c : text) {
            unsigned char u = static_cast<unsigned char>(c);
            if (std::isalnum(u) || c == '_') {
                token.push_back(static_cast<char>(std::tolower(u)));
            } else {
                flush();
            }
        }
        flush();
        if (!any) values[0] = 1.0f; // token-free text: fixed unit vector
        double norm = 0.0;
        for (float v : values) norm += static_cast<double>(v) * static_cast<double>(v);
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            values.assign(dim_, 0.0f);
            values[0] = 1.0f;
        } else {
            for (float& v : values) v = static_cast<float>(v / norm);
        }
        out.push_back({std::move(values)});
    }
    return out;
}

HttpEmbedder::HttpEmbedder(EmbeddingHttpOptions options) : options_(std::move(options)) {
    if (options_.endpoint_url.empty()) {
        throw ConfigError("http embedder requires an endpoint url");
    }
}

std::vector<EmbeddingVector> HttpEmbedder::embed(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t start = 0; start < texts.size(); start += options_.batch_size) {
        std::size_t end = std::min(texts.size(), start + options_.batch_size);
        nlohmann::json body;
        body["input"] = std::vector<std::string>(texts.begin() + start, texts.begin() + end);
        body["model"] = options_.model_name;

        std::string response_body;
        int attempts = 0;
        while (true) {
            ++attempts;
            httplib::Client client(options_.endpoint_url);
            client.set_connection_timeout(0, options_.timeout_ms * 1000);
            client.set_read_timeout(0, options_.timeout_ms * 1000);
            auto res = client.Post("/embeddings", body.dump(), "application/json");
            bool retryable = false;
            std::string failure;
            if (!res) {
                retryable = true;
                failure = "connection error";
            } else if (res->status >= 500 || res->status == 429) {
                retryable = true;
                failure = "status " + std::to_string(res->status);
            } else if (res->status != 200) {
                throw HttpStatus(res->status, res->body);
            } else {
                response_body = res->body;
                break;
            }
            if (attempts > options_.retry_limit) {
                throw EmbedderFailure("embedding request failed after " +
                                      std::to_string(attempts) + " attempts: " + failure);
            }
            int delay = options_.backoff_base_ms << (attempts - 1);
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }

        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(response_body);
        } catch (const nlohmann::json::exception& e) {
            throw MalformedResponseBody(e.what());
        }
        if (!parsed.contains("data") || !parsed["data"].is_array() ||
            parsed["data"].size() != end - start) {
            throw MalformedResponseBody("embedding response data shape mismatch");
        }
        std::vector<EmbeddingVector> batch(end - start);
        for (const auto& item : parsed["data"]) {
            if (!item.contains("embedding") || !item["embedding"].is_array() ||
                !item.contains("index") || !item["index"].is_number_integer()) {
                throw MalformedResponseBody("embedding item missing fields");
            }
            std::size_t idx = item["index"].get<std::size_t>();
            if (idx >= batch.size()) throw MalformedResponseBody("embedding index out of range");
            EmbeddingVector vec;
            vec.values.reserve(item["embedding"].size());
            for (const auto& x : item["embedding"]) {
                vec.values.push_back(x.get<float>());
            }
            if (dim_ == 0) dim_ = vec.dim();
            if (vec.dim() != dim_) {
                throw DimensionMismatch("embedding dim " + std::to_string(vec.dim()) +
                                        " != " + std::to_string(dim_));
            }
            batch[idx] = std::move(vec);
        }
        for (auto& vec : batch) out.push_back(std::move(vec));
    }
    return out;
}

} // namespace reagan
