#include <doctest.h>

#include <atomic>
#include <cmath>
#include <mutex>
#include <vector>

#include <json.hpp>

#include "reagan/embedding.hpp"
#include "reagan/errors.hpp"
#include "reagan/text_util.hpp"
#include "stub_server.hpp"

using namespace reagan;

namespace {

double l2_norm(const EmbeddingVector& v) {
    double s = 0.0;
    for (float x : v.values) s += static_cast<double>(x) * x;
    return std::sqrt(s);
}

} // namespace

TEST_CASE("hash embedder is deterministic across instances") {
    HashEmbedder a(32, 7);
    HashEmbedder b(32, 7);
    auto va = a.embed_one("graph neural reasoning");
    auto vb = b.embed_one("graph neural reasoning");
    CHECK(va.values == vb.values);
    CHECK(va.dim() == 32);
    CHECK(a.dim() == 32);
    CHECK(a.model_name() == "hash-32-7");
}

TEST_CASE("hash embedder output is unit length") {
    HashEmbedder e(64, 0);
    for (const char* text : {"one", "two words here", "punct, split; tokens!", "x"}) {
        CHECK(l2_norm(e.embed_one(text)) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("token placement follows the token hash") {
    // fnv1a64("a") = 0xaf63dc4c8601ec8c: bucket = h % 8 = 4, bit 32 clear = negative sign
    HashEmbedder e(8, 0);
    auto v = e.embed_one("a");
    REQUIRE(v.dim() == 8);
    CHECK(v.values[4] == doctest::Approx(-1.0f));
    for (std::size_t i = 0; i < 8; ++i) {
        if (i != 4) CHECK(v.values[i] == 0.0f);
    }
    // repeated token accumulates then normalizes back to the same unit vector
    CHECK(e.embed_one("a A").values == v.values);
}

TEST_CASE("tokenization lowercases and splits on non-word bytes") {
    HashEmbedder e(64, 0);
    CHECK(e.embed_one("Hello World").values == e.embed_one("hello world").values);
    CHECK(e.embed_one("hello,world").values == e.embed_one("hello world").values);
    CHECK(e.embed_one("hello_world").values != e.embed_one("hello world").values);
}

TEST_CASE("token-free text maps to the fixed unit vector") {
    HashEmbedder e(16, 3);
    for (const char* text : {"", "   ", "!?.,;"}) {
        auto v = e.embed_one(text);
        CHECK(v.values[0] == 1.0f);
        for (std::size_t i = 1; i < 16; ++i) CHECK(v.values[i] == 0.0f);
    }
}

TEST_CASE("cancelling tokens fall back to the fixed unit vector") {
    // at dim 1 every token lands in bucket 0; "a" hashes negative and
    // "foobar" positive (bit 32 of 0x85944171f73967e8), so the sum is zero
    REQUIRE(((fnv1a64("a") >> 32) & 1) == 0);
    REQUIRE(((fnv1a64("foobar") >> 32) & 1) == 1);
    HashEmbedder e(1, 0);
    CHECK(e.embed_one("a foobar").values == std::vector<float>{1.0f});
}

TEST_CASE("seed changes the embedding") {
    HashEmbedder a(64, 0);
    HashEmbedder b(64, 1);
    CHECK(a.embed_one("same text").values != b.embed_one("same text").values);
}

TEST_CASE("batch embed matches embed_one per element") {
    HashEmbedder e(32, 5);
    std::vector<std::string> texts = {"first", "second text", "third entry here"};
    auto batch = e.embed(texts);
    REQUIRE(batch.size() == 3);
    for (std::size_t i = 0; i < texts.size(); ++i) {
        CHECK(batch[i].values == e.embed_one(texts[i]).values);
    }
}

TEST_CASE("zero embedding dimension is rejected") {
    CHECK_THROWS_AS(HashEmbedder(0, 0), EmbedderFailure);
}

TEST_CASE("http embedder requires an endpoint") {
    EmbeddingHttpOptions opts;
    CHECK_THROWS_AS(HttpEmbedder{opts}, ConfigError);
}

TEST_CASE("http embedder round trip") {
    test_support::StubServer server;
    std::mutex mu;
    std::vector<nlohmann::json> requests;
    server.post("/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
        auto body = nlohmann::json::parse(req.body);
        {
            std::lock_guard<std::mutex> lock(mu);
            requests.push_back(body);
        }
        nlohmann::json out;
        out["data"] = nlohmann::json::array();
        // reply items deliberately out of order; the client must sort by index
        for (std::size_t i = body["input"].size(); i-- > 0;) {
            nlohmann::json item;
            item["index"] = i;
            item["embedding"] = {static_cast<double>(i), 1.0, 2.0};
            out["data"].push_back(item);
        }
        res.set_content(out.dump(), "application/json");
    });
    std::string endpoint = server.start();

    EmbeddingHttpOptions opts;
    opts.endpoint_url = endpoint;
    opts.model_name = "stub-model";
    opts.batch_size = 2;
    HttpEmbedder e(opts);
    CHECK(e.dim() == 0); // unknown until the first reply

    auto vecs = e.embed({"t0", "t1", "t2", "t3", "t4"});
    REQUIRE(vecs.size() == 5);
    CHECK(e.dim() == 3);
    CHECK(vecs[0].values == std::vector<float>{0.0f, 1.0f, 2.0f});
    CHECK(vecs[1].values == std::vector<float>{1.0f, 1.0f, 2.0f});
    CHECK(vecs[4].values == std::vector<float>{0.0f, 1.0f, 2.0f});

    // batch_size 2 over five texts means three requests
    REQUIRE(requests.size() == 3);
    CHECK(requests[0]["input"] == nlohmann::json::array({"t0", "t1"}));
    CHECK(requests[2]["input"] == nlohmann::json::array({"t4"}));
    CHECK(requests[0]["model"] == "stub-model");
}

TEST_CASE("http embedder retries transient failures") {
    test_support::StubServer server;
    std::atomic<int> hits{0};
    server.post("/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
        int n = ++hits;
        if (n <= 2) {
            res.status = 500;
            return;
        }
        auto body = nlohmann::json::parse(req.body);
        nlohmann::json out;
        out["data"] = {{{"index", 0}, {"embedding", {1.0, 0.0}}}};
        res.set_content(out.dump(), "application/json");
    });
    std::string endpoint = server.start();

    EmbeddingHttpOptions opts;
    opts.endpoint_url = endpoint;
    opts.retry_limit = 3;
    opts.backoff_base_ms = 1;
    HttpEmbedder e(opts);
    auto v = e.embed_one("text");
    CHECK(v.values == std::vector<float>{1.0f, 0.0f});
    CHECK(hits.load() == 3);
}

TEST_CASE("http embedder gives up after retry_limit retries") {
    test_support::StubServer server;
    std::atomic<int> hits{0};
    server.post("/embeddings", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 503;
    });
    std::string endpoint = server.start();

    EmbeddingHttpOptions opts;
    opts.endpoint_url = endpoint;
    opts.retry_limit = 2;
    opts.backoff_base_ms = 1;
    HttpEmbedder e(opts);
    CHECK_THROWS_AS(e.embed_one("text"), EmbedderFailure);
    CHECK(hits.load() == 3); // initial attempt plus two retries
}

TEST_CASE("http embedder surfaces non-retryable status immediately") {
    test_support::StubServer server;
    std::atomic<int> hits{0};
    server.post("/embeddings", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 400;
        res.set_content("bad input", "text/plain");
    });
    std::string endpoint = server.start();

    EmbeddingHttpOptions opts;
    opts.endpoint_url = endpoint;
    opts.retry_limit = 5;
    opts.backoff_base_ms = 1;
    HttpEmbedder e(opts);
    CHECK_THROWS_AS(e.embed_one("text"), HttpStatus);
    CHECK(hits.load() == 1);
}

TEST_CASE("http embedder rejects malformed reply bodies") {
    test_support::StubServer server;
    int mode = 0;
    server.post("/embeddings", [&](const httplib::Request&, httplib::Response& res) {
        switch (mode) {
        case 0: res.set_content("not json", "application/json"); break;
        case 1: res.set_content(R"({"data": "nope"})", "application/json"); break;
        case 2: res.set_content(R"({"data": []})", "application/json"); break;
        default:
            res.set_content(R"({"data": [{"embedding": [1.0]}]})", "application/json");
            break;
        }
    });
    std::string endpoint = server.start();

    EmbeddingHttpOptions opts;
    opts.endpoint_url = endpoint;
    HttpEmbedder e(opts);
    for (mode = 0; mode <= 3; ++mode) {
        CHECK_THROWS_AS(e.embed_one("text"), MalformedResponseBody);
    }
}

TEST_CASE("http embedder rejects inconsistent dimensions") {
    test_support::StubServer server;
    server.post("/embeddings", [&](const httplib::Request&, httplib::Response& res) {
        nlohmann::json out;
        out["data"] = {{{"index", 0}, {"embedding", {1.0, 0.0}}},
                       {{"index", 1}, {"embedding", {1.0, 0.0, 3.0}}}};
        res.set_content(out.dump(), "application/json");
    });
    std::string endpoint = server.start();

    EmbeddingHttpOptions opts;
    opts.endpoint_url = endpoint;
    HttpEmbedder e(opts);
    CHECK_THROWS_AS(e.embed({"a", "b"}), DimensionMismatch);
}
