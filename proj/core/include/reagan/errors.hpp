#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace reagan {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

// dataset loading
struct MalformedRecord : Error {
    MalformedRecord(const std::string& path, std::size_t line, const std::string& reason)
        : Error(path + ":" + std::to_string(line) + ": " + reason), line_no(line) {}
    std::size_t line_no;
};
struct DanglingEdge : Error { using Error::Error; };
struct EmptyText : Error { using Error::Error; };
struct UnknownNode : Error {
    explicit UnknownNode(std::int64_t v)
        : Error("unknown node id " + std::to_string(v)), node(v) {}
    std::int64_t node;
};

// memory
struct LabelLeakage : Error { using Error::Error; };

// embedding / retrieval
struct EmbedderFailure : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct ZeroVector : Error { using Error::Error; };
struct EmptyIndex : Error { using Error::Error; };

// llm backends
struct Timeout : Error { using Error::Error; };
struct HttpStatus : Error {
    HttpStatus(int status, const std::string& detail)
        : Error("http status " + std::to_string(status) + ": " + detail), code(status) {}
    int code;
};
struct RetriesExhausted : Error { using Error::Error; };
struct MalformedResponseBody : Error { using Error::Error; };
struct ReplayMiss : Error { using Error::Error; };
struct TranscriptFormat : Error { using Error::Error; };

// prompts
struct BudgetUnderflow : Error { using Error::Error; };
struct InvalidPrediction : Error { using Error::Error; };

// actions
struct SummarizeBackendFailure : Error { using Error::Error; };

// engine
struct FailureThresholdExceeded : Error { using Error::Error; };

} // namespace reagan
