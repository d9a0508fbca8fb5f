#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reagan/actions.hpp"
#include "reagan/graph.hpp"
#include "reagan/llm_client.hpp"
#include "reagan/memory.hpp"
#include "reagan/prompts.hpp"
#include "reagan/retrieval.hpp"
#include "reagan/snapshot.hpp"
#include "reagan/types.hpp"

namespace reagan {

enum class PlannerMode { Llm, FixedSequence };

std::string planner_mode_name(PlannerMode mode);

struct RunConfig {
    int layers = 3;
    std::size_t k = 5;
    std::size_t local_limit = 5;
    std::size_t global_limit = 5;
    int hops = 1;
    Strategy strategy = Strategy::A;
    LabelVisibility label_visibility = LabelVisibility::Anonymized;
    PlannerMode planner_mode = PlannerMode::Llm;
    // Layer l takes fixed_sequence[(l-1) % size] when planner_mode is
    // FixedSequence.
    std::vector<ActionKind> fixed_sequence = {ActionKind::LocalAggregate,
                                              ActionKind::GlobalAggregate, ActionKind::NoOp};
    bool allow_local = true;  // action mask
    bool allow_global = true;
    TextAggMode textagg_mode = TextAggMode::Concat;
    std::size_t char_budget = 1200;
    PromptBudget prompt_budget;
    int max_output_tokens = 512;
    double temperature = 0.0;
    bool examples_use_raw_text = false;
    bool evaluate_all_nodes = false;
    double failure_threshold = 0.05;
    int workers = 1;
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    BackendConfig backend;
};

std::string action_mask_string(const RunConfig& config);

// Event names recorded in traces.
inline constexpr const char* kEventParseFallback = "parse_fallback";
inline constexpr const char* kEventMaskedAction = "masked_action";
inline constexpr const char* kEventPlanningFailure = "planning_failure";
inline constexpr const char* kEventPredictionFailure = "prediction_failure";
inline constexpr const char* kEventSummarizeDegraded = "summarize_degraded";
inline constexpr const char* kEventInvalidPrediction = "invalid_prediction";
inline constexpr const char* kEventPredictionReask = "prediction_reask";

struct ActionOutcome {
    ActionKind kind = ActionKind::NoOp;
    std::optional<AggregationResult> result; // absent for NoOp
};

struct LayerRecord {
    int layer = 0;
    std::string prompt;    // empty under FixedSequence
    std::string raw_reply; // empty under FixedSequence
    std::vector<ActionKind> planned;
    std::vector<ActionOutcome> executed;
    std::vector<std::string> events;
    std::string carried_aggregate; // buffer state after the layer
    std::size_t entries_added = 0;
    std::size_t llm_calls = 0;
    bool failed = false; // planning call failed after retries
};

struct PredictionRecord {
    std::string prompt;
    std::string raw_reply;
    int predicted = -1; // -1 when no valid prediction was obtained
    std::optional<int> gold;
    bool correct = false;
    std::vector<std::string> events;
    std::size_t llm_calls = 0;
    bool failed = false;
};

struct NodeTrace {
    NodeId node_id = 0;
    std::vector<LayerRecord> layers;
    PredictionRecord prediction;
};

struct RunMetrics {
    double accuracy = 0.0;
    std::size_t evaluated_count = 0;
    std::size_t correct_count = 0;
    std::map<int, double> per_class_accuracy;
    std::map<std::string, std::size_t> action_histogram;
    double parse_fallback_rate = 0.0;
    std::size_t parse_fallbacks = 0;
    std::size_t llm_calls = 0;
    std::size_t planning_calls = 0;
    std::size_t prediction_calls = 0;
    std::size_t reasks = 0;
    std::size_t failed_steps = 0;
    std::size_t total_steps = 0;
    double wall_clock_seconds = 0.0;
};

struct RunResult {
    std::map<NodeId, int> predictions; // evaluated node -> class (-1 invalid)
    std::vector<NodeTrace> traces;     // ascending node id
    RunMetrics metrics;
    std::vector<MemoryBuffer> buffers; // indexed by node id, final state
};

struct EngineServices {
    ChatBackend* backend = nullptr;
    EmbeddingProvider* embedder = nullptr; // required when global enabled
    const SemanticIndex* index = nullptr;  // required when global enabled
};

LayerSnapshot initial_snapshot(const TextAttributedGraph& graph);

// One node's layer step: plan (LLM or fixed), mask, execute, fold into the
// buffer. Reads only the previous-layer snapshot.
LayerRecord run_node_layer(NodeId v, int layer, const LayerSnapshot& snapshot,
                           MemoryBuffer& buffer, const TextAttributedGraph& graph,
                           const RunConfig& config, const EngineServices& services);

// Runs one layer over the evaluated nodes (config.workers tasks), then
// publishes the next snapshot. Aborts with FailureThresholdExceeded when the
// cumulative failed-step fraction exceeds config.failure_threshold.
LayerSnapshot run_layer(const TextAttributedGraph& graph, const LayerSnapshot& previous,
                        std::vector<MemoryBuffer>& buffers, const std::vector<NodeId>& evaluated,
                        const RunConfig& config, const EngineServices& services,
                        std::vector<NodeTrace>& traces, RunMetrics& metrics);

// Full pass: init memories, L layers, one prediction per evaluated node
// (test split unless evaluate_all_nodes), metrics.
RunResult run_inference(const TextAttributedGraph& graph, const RunConfig& config,
                        const EngineServices& services);

void write_metrics_json(const RunMetrics& metrics, const std::string& path);
void write_predictions_csv(const RunResult& result, const TextAttributedGraph& graph,
                           const std::string& path);
void write_trace_jsonl(const RunResult& result, const std::string& path);

} // namespace reagan
