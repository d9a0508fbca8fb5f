#include "reagan/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "reagan/errors.hpp"

namespace reagan {

const std::string& LayerSnapshot::aggregate_of(NodeId v) const {
    return aggregates.at(static_cast<std::size_t>(v));
}

std::string planner_mode_name(PlannerMode mode) {
    return mode == PlannerMode::Llm ? "llm" : "fixed_sequence";
}

std::string action_mask_string(const RunConfig& config) {
    if (config.allow_local && config.allow_global) return "local,global";
    if (config.allow_local) return "local";
    if (config.allow_global) return "global";
    return "";
}

namespace {

std::string trace_action_key(ActionKind kind) {
    switch (kind) {
    case ActionKind::LocalAggregate: return "local_aggregate";
    case ActionKind::GlobalAggregate: return "global_aggregate";
    case ActionKind::NoOp: return "no_op";
    }
    return "no_op";
}

PromptOptions make_prompt_options(const RunConfig& config) {
    PromptOptions options;
    options.strategy = config.strategy;
    options.budget = config.prompt_budget;
    options.visibility = config.label_visibility;
    options.local_limit = config.local_limit;
    options.global_limit = config.global_limit;
    return options;
}

ChatRequest make_request(const RunConfig& config, std::string user_text, std::string tag) {
    ChatRequest request;
    request.system_text = system_text();
    request.user_text = std::move(user_text);
    request.max_output_tokens = config.max_output_tokens;
    request.temperature = config.temperature;
    request.request_tag = std::move(tag);
    return request;
}

AggregationResult execute_aggregate(ActionKind kind, NodeId v, int layer,
                                    const LayerSnapshot& snapshot,
                                    const TextAttributedGraph& graph, const RunConfig& config,
                                    const EngineServices& services, LayerRecord& record) {
    AggregateOptions options;
    options.mode = config.textagg_mode;
    options.char_budget = config.char_budget;
    options.hops = config.hops;
    options.k = config.k;
    options.examples_use_raw_text = config.examples_use_raw_text;

    Summarizer summarizer;
    if (options.mode == TextAggMode::Summarize && services.backend != nullptr) {
        std::string purpose = kind == ActionKind::LocalAggregate ? "summarize.local"
                                                                 : "summarize.global";
        summarizer = [&, purpose](const std::string& material) {
            ++record.llm_calls;
            return services.backend->complete(
                make_request(config, summarize_prompt(material), make_layer_tag(v, layer, purpose)));
        };
    }

    auto run = [&](const AggregateOptions& opts, const Summarizer& sum) {
        if (kind == ActionKind::LocalAggregate) {
            return local_aggregate(v, snapshot, graph, opts, sum);
        }
        return global_aggregate(v, snapshot, *services.index, *services.embedder, opts, sum);
    };

    try {
        return run(options, summarizer);
    } catch (const SummarizeBackendFailure&) {
        record.events.push_back(kEventSummarizeDegraded);
        AggregateOptions concat_options = options;
        concat_options.mode = TextAggMode::Concat;
        return run(concat_options, {});
    }
}

} // namespace

LayerSnapshot initial_snapshot(const TextAttributedGraph& graph) {
    LayerSnapshot snapshot;
    snapshot.layer = 0;
    snapshot.aggregates.reserve(graph.node_count());
    for (const NodeRecord& n : graph.nodes()) snapshot.aggregates.push_back(n.text);
    return snapshot;
}

LayerRecord run_node_layer(NodeId v, int layer, const LayerSnapshot& snapshot,
                           MemoryBuffer& buffer, const TextAttributedGraph& graph,
                           const RunConfig& config, const EngineServices& services) {
    LayerRecord record;
    record.layer = layer;
    std::size_t entries_before = buffer.entries().size();

    if (config.planner_mode == PlannerMode::FixedSequence) {
        const auto& seq = config.fixed_sequence;
        ActionKind kind = ActionKind::NoOp;
        if (!seq.empty()) {
            kind = seq[static_cast<std::size_t>((layer - 1) % static_cast<int>(seq.size()))];
        }
        record.planned = {kind};
    } else {
        record.prompt = build_planning_prompt(buffer, graph.labels(), make_prompt_options(config));
        ++record.llm_calls;
        try {
            record.raw_reply = services.backend->complete(
                make_request(config, record.prompt, make_layer_tag(v, layer, "plan")));
        } catch (const Error&) {
            record.events.push_back(kEventPlanningFailure);
            record.failed = true;
            record.planned = {ActionKind::NoOp};
        }
        if (!record.failed) {
            ActionPlan plan = parse_action_plan(record.raw_reply);
            if (plan.fallback) record.events.push_back(kEventParseFallback);
            record.planned = plan.actions;
        }
    }

    auto is_train = [&graph](NodeId u) { return graph.node(u).split == Split::Train; };

    for (ActionKind kind : record.planned) {
        ActionKind effective = kind;
        if ((kind == ActionKind::LocalAggregate && !config.allow_local) ||
            (kind == ActionKind::GlobalAggregate && !config.allow_global)) {
            record.events.push_back(kEventMaskedAction);
            effective = ActionKind::NoOp;
        }
        ActionOutcome outcome;
        outcome.kind = effective;
        if (effective == ActionKind::NoOp) {
            no_op(v);
            record.executed.push_back(std::move(outcome));
            continue;
        }
        AggregationResult result =
            execute_aggregate(effective, v, layer, snapshot, graph, config, services, record);

        MemorySource source = effective == ActionKind::LocalAggregate ? MemorySource::Local
                                                                      : MemorySource::Global;
        std::vector<IncomingExample> incoming;
        incoming.reserve(result.examples.size());
        for (const CollectedExample& ex : result.examples) {
            incoming.push_back({ex.origin_node, ex.text, ex.label, source, ex.rank});
        }
        append_layer_results(buffer, layer, std::make_pair(source, result.new_aggregate),
                             incoming, is_train);
        outcome.result = std::move(result);
        record.executed.push_back(std::move(outcome));
    }

    record.carried_aggregate = buffer.carried_aggregate();
    record.entries_added = buffer.entries().size() - entries_before;
    return record;
}

namespace {

// Shared by layer and prediction phases: runs fn(i) for i in [0, n) across
// config.workers threads; the first exception is rethrown after joining.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    int count = std::max(1, workers);
    if (n < static_cast<std::size_t>(count)) count = static_cast<int>(n == 0 ? 1 : n);
    if (count == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    auto work = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) break;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(count));
    for (int t = 0; t < count; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace

LayerSnapshot run_layer(const TextAttributedGraph& graph, const LayerSnapshot& previous,
                        std::vector<MemoryBuffer>& buffers, const std::vector<NodeId>& evaluated,
                        const RunConfig& config, const EngineServices& services,
                        std::vector<NodeTrace>& traces, RunMetrics& metrics) {
    int layer = previous.layer + 1;
    std::vector<LayerRecord> records(evaluated.size());

    parallel_for(evaluated.size(), config.workers, [&](std::size_t i) {
        NodeId v = evaluated[i];
        records[i] = run_node_layer(v, layer, previous, buffers[static_cast<std::size_t>(v)],
                                    graph, config, services);
    });

    for (std::size_t i = 0; i < evaluated.size(); ++i) {
        LayerRecord& record = records[i];
        metrics.llm_calls += record.llm_calls;
        if (config.planner_mode == PlannerMode::Llm && !record.failed) ++metrics.planning_calls;
        if (record.failed) ++metrics.failed_steps;
        for (const std::string& event : record.events) {
            if (event == kEventParseFallback) ++metrics.parse_fallbacks;
        }
        for (const ActionOutcome& outcome : record.executed) {
            ++metrics.action_histogram[trace_action_key(outcome.kind)];
        }
        traces[i].layers.push_back(std::move(record));
    }
    metrics.total_steps += evaluated.size();

    if (metrics.total_steps > 0 &&
        static_cast<double>(metrics.failed_steps) / static_cast<double>(metrics.total_steps) >
            config.failure_threshold) {
        throw FailureThresholdExceeded(
            std::to_string(metrics.failed_steps) + " of " + std::to_string(metrics.total_steps) +
            " node-layer steps failed (threshold " + std::to_string(config.failure_threshold) +
            ")");
    }

    LayerSnapshot next;
    next.layer = layer;
    next.aggregates = previous.aggregates;
    for (NodeId v : evaluated) {
        next.aggregates[static_cast<std::size_t>(v)] =
            buffers[static_cast<std::size_t>(v)].carried_aggregate();
    }
    return next;
}

namespace {

PredictionRecord predict_node(NodeId v, const MemoryBuffer& buffer,
                              const TextAttributedGraph& graph, const RunConfig& config,
                              const EngineServices& services) {
    PredictionRecord record;
    record.gold = graph.node(v).label;
    record.prompt = build_prediction_prompt(buffer, graph.labels(), make_prompt_options(config));

    ++record.llm_calls;
    try {
        record.raw_reply = services.backend->complete(
            make_request(config, record.prompt, make_predict_tag(v)));
    } catch (const Error&) {
        record.events.push_back(kEventPredictionFailure);
        record.failed = true;
        return record;
    }

    try {
        record.predicted = parse_prediction(record.raw_reply, graph.labels()).label_index;
    } catch (const InvalidPrediction&) {
        record.events.push_back(kEventInvalidPrediction);
        record.events.push_back(kEventPredictionReask);
        ++record.llm_calls;
        try {
            std::string retry_reply = services.backend->complete(make_request(
                config, record.prompt + "\n\n" + reask_suffix(), make_predict_tag(v, true)));
            record.raw_reply = retry_reply;
            try {
                record.predicted = parse_prediction(retry_reply, graph.labels()).label_index;
            } catch (const InvalidPrediction&) {
                record.events.push_back(kEventInvalidPrediction);
                record.predicted = -1; // scored incorrect, never dropped
            }
        } catch (const Error&) {
            record.events.push_back(kEventPredictionFailure);
            record.failed = true;
        }
    }
    record.correct = record.gold.has_value() && record.predicted >= 0 &&
                     *record.gold == record.predicted;
    return record;
}

} // namespace

RunResult run_inference(const TextAttributedGraph& graph, const RunConfig& config,
                        const EngineServices& services) {
    auto start = std::chrono::steady_clock::now();

    if (config.layers < 1) throw ConfigError("layers must be >= 1");
    if (services.backend == nullptr) throw ConfigError("run requires a chat backend");
    if (config.allow_global &&
        (services.index == nullptr || services.embedder == nullptr)) {
        throw ConfigError("global aggregation requires an embedder and a built index");
    }
    if (!config.allow_local && !config.allow_global) {
        throw ConfigError("action mask must keep at least one action");
    }

    RunResult result;
    result.buffers.reserve(graph.node_count());
    for (const NodeRecord& n : graph.nodes()) result.buffers.push_back(init_memory(n));

    std::vector<NodeId> evaluated;
    for (const NodeRecord& n : graph.nodes()) {
        if (config.evaluate_all_nodes || n.split == Split::Test) evaluated.push_back(n.id);
    }

    result.traces.resize(evaluated.size());
    for (std::size_t i = 0; i < evaluated.size(); ++i) result.traces[i].node_id = evaluated[i];

    LayerSnapshot snapshot = initial_snapshot(graph);
    for (int layer = 1; layer <= config.layers; ++layer) {
        snapshot = run_layer(graph, snapshot, result.buffers, evaluated, config, services,
                             result.traces, result.metrics);
    }

    std::vector<PredictionRecord> predictions(evaluated.size());
    parallel_for(evaluated.size(), config.workers, [&](std::size_t i) {
        NodeId v = evaluated[i];
        predictions[i] =
            predict_node(v, result.buffers[static_cast<std::size_t>(v)], graph, config, services);
    });

    RunMetrics& m = result.metrics;
    std::map<int, std::pair<std::size_t, std::size_t>> per_class; // class -> (correct, total)
    for (std::size_t i = 0; i < evaluated.size(); ++i) {
        PredictionRecord& record = predictions[i];
        m.llm_calls += record.llm_calls;
        ++m.prediction_calls;
        for (const std::string& event : record.events) {
            if (event == kEventPredictionReask) ++m.reasks;
        }
        if (record.correct) ++m.correct_count;
        if (record.gold) {
            auto& [correct, total] = per_class[*record.gold];
            if (record.correct) ++correct;
            ++total;
        }
        result.predictions[evaluated[i]] = record.predicted;
        result.traces[i].prediction = std::move(record);
    }
    m.evaluated_count = evaluated.size();
    m.accuracy = evaluated.empty()
                     ? 0.0
                     : static_cast<double>(m.correct_count) / static_cast<double>(evaluated.size());
    for (const auto& [cls, counts] : per_class) {
        m.per_class_accuracy[cls] =
            counts.second == 0 ? 0.0
                               : static_cast<double>(counts.first) /
                                     static_cast<double>(counts.second);
    }
    m.parse_fallback_rate = m.planning_calls == 0
                                ? 0.0
                                : static_cast<double>(m.parse_fallbacks) /
                                      static_cast<double>(m.planning_calls);
    m.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

namespace {

nlohmann::ordered_json aggregation_json(const AggregationResult& result) {
    nlohmann::ordered_json j;
    j["source"] = memory_source_name(result.source);
    j["new_aggregate"] = result.new_aggregate;
    nlohmann::ordered_json examples = nlohmann::ordered_json::array();
    for (const CollectedExample& ex : result.examples) {
        examples.push_back({{"origin_node", ex.origin_node},
                            {"text", ex.text},
                            {"label", ex.label},
                            {"rank", ex.rank}});
    }
    j["examples"] = std::move(examples);
    j["contributing_nodes"] = result.contributing_nodes;
    return j;
}

nlohmann::ordered_json trace_json(const NodeTrace& trace) {
    nlohmann::ordered_json j;
    j["node"] = trace.node_id;
    nlohmann::ordered_json layers = nlohmann::ordered_json::array();
    for (const LayerRecord& record : trace.layers) {
        nlohmann::ordered_json lj;
        lj["layer"] = record.layer;
        lj["prompt"] = record.prompt;
        lj["raw_reply"] = record.raw_reply;
        nlohmann::ordered_json planned = nlohmann::ordered_json::array();
        for (ActionKind k : record.planned) planned.push_back(trace_action_key(k));
        lj["planned"] = std::move(planned);
        nlohmann::ordered_json executed = nlohmann::ordered_json::array();
        for (const ActionOutcome& outcome : record.executed) {
            nlohmann::ordered_json oj;
            oj["action"] = trace_action_key(outcome.kind);
            if (outcome.result) {
                oj["result"] = aggregation_json(*outcome.result);
            } else {
                oj["result"] = nullptr;
            }
            executed.push_back(std::move(oj));
        }
        lj["executed"] = std::move(executed);
        lj["events"] = record.events;
        lj["carried_aggregate"] = record.carried_aggregate;
        lj["entries_added"] = record.entries_added;
        lj["llm_calls"] = record.llm_calls;
        lj["failed"] = record.failed;
        layers.push_back(std::move(lj));
    }
    j["layers"] = std::move(layers);

    nlohmann::ordered_json pj;
    pj["prompt"] = trace.prediction.prompt;
    pj["raw_reply"] = trace.prediction.raw_reply;
    pj["predicted"] = trace.prediction.predicted;
    if (trace.prediction.gold) {
        pj["gold"] = *trace.prediction.gold;
    } else {
        pj["gold"] = nullptr;
    }
    pj["correct"] = trace.prediction.correct;
    pj["events"] = trace.prediction.events;
    pj["llm_calls"] = trace.prediction.llm_calls;
    pj["failed"] = trace.prediction.failed;
    j["prediction"] = std::move(pj);
    return j;
}

} // namespace

void write_metrics_json(const RunMetrics& metrics, const std::string& path) {
    nlohmann::ordered_json j;
    j["accuracy"] = metrics.accuracy;
    j["evaluated"] = metrics.evaluated_count;
    j["correct"] = metrics.correct_count;
    nlohmann::ordered_json per_class;
    for (const auto& [cls, acc] : metrics.per_class_accuracy) {
        per_class[std::to_string(cls)] = acc;
    }
    j["per_class_accuracy"] = std::move(per_class);
    j["action_histogram"] = metrics.action_histogram;
    j["parse_fallback_rate"] = metrics.parse_fallback_rate;
    j["parse_fallbacks"] = metrics.parse_fallbacks;
    j["llm_calls"] = metrics.llm_calls;
    j["planning_calls"] = metrics.planning_calls;
    j["prediction_calls"] = metrics.prediction_calls;
    j["reasks"] = metrics.reasks;
    j["failed_steps"] = metrics.failed_steps;
    j["total_steps"] = metrics.total_steps;
    j["wall_clock_seconds"] = metrics.wall_clock_seconds;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << "\n";
}

void write_predictions_csv(const RunResult& result, const TextAttributedGraph& graph,
                           const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "node_id,gold,predicted,correct\n";
    for (const NodeTrace& trace : result.traces) {
        const NodeRecord& n = graph.node(trace.node_id);
        std::string gold;
        if (trace.prediction.gold) {
            gold = graph.labels().display_names[static_cast<std::size_t>(*trace.prediction.gold)];
        }
        std::string predicted;
        if (trace.prediction.predicted >= 0) {
            predicted = graph.labels()
                            .display_names[static_cast<std::size_t>(trace.prediction.predicted)];
        }
        out << n.external_id << "," << gold << "," << predicted << ","
            << (trace.prediction.correct ? 1 : 0) << "\n";
    }
}

void write_trace_jsonl(const RunResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    for (const NodeTrace& trace : result.traces) {
        out << trace_json(trace).dump() << "\n";
    }
}

} // namespace reagan
