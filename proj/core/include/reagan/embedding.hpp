#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace reagan {

struct EmbeddingVector {
    std::vector<float> values;
    std::size_t dim() const { return values.size(); }
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    // 0 until known (http providers learn the dimension from the first reply).
    virtual std::size_t dim() const = 0;
    virtual std::string model_name() const = 0;

    // One vector per input text, constant dimension.
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;

    EmbeddingVector embed_one(const std::string& text);
};

// Deterministic feature-hashing embedder, the test stand-in for a sentence
// embedding service. Tokens are lowercased [a-z0-9_]+ runs; each token is
// hashed into a bucket with a sign bit and the vector is L2 normalized.
// Token-free input maps to a fixed unit vector instead of the zero vector.
class HashEmbedder : public EmbeddingProvider {
public:
    explicit HashEmbedder(std::size_t dim = 64, std::uint64_t seed = 0);

    std::size_t dim() const override { return dim_; }
    std::string model_name() const override;
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

struct EmbeddingHttpOptions {
    std::string endpoint_url;
    std::string model_name = "all-MiniLM-L6-v2";
    int timeout_ms = 30000;
    int retry_limit = 3;
    int backoff_base_ms = 100;
    std::size_t batch_size = 64;
};

// POST {endpoint}/embeddings with {"input": [...], "model": ...}; reads
// data[i].embedding ordered by index.
class HttpEmbedder : public EmbeddingProvider {
public:
    explicit HttpEmbedder(EmbeddingHttpOptions options);

    std::size_t dim() const override { return dim_; }
    std::string model_name() const override { return options_.model_name; }
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

private:
    EmbeddingHttpOptions options_;
    std::size_t dim_ = 0;
};

} // namespace reagan
