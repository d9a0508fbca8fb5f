#include "reagan/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include <json.hpp>

#include "reagan/actions.hpp"
#include "reagan/errors.hpp"
#include "reagan/graph.hpp"
#include "reagan/retrieval.hpp"

namespace reagan {

std::string variant_name(Variant v) {
    switch (v) {
    case Variant::Full: return "full";
    case Variant::NoPlanning: return "no_planning";
    case Variant::LocalOnly: return "local_only";
    case Variant::GlobalOnly: return "global_only";
    }
    return "full";
}

std::optional<Variant> variant_from_name(const std::string& name) {
    if (name == "full") return Variant::Full;
    if (name == "no_planning") return Variant::NoPlanning;
    if (name == "local_only") return Variant::LocalOnly;
    if (name == "global_only") return Variant::GlobalOnly;
    return std::nullopt;
}

VariantConfig variant_mapping(Variant v) {
    switch (v) {
    case Variant::Full: return {PlannerMode::Llm, true, true};
    case Variant::NoPlanning: return {PlannerMode::FixedSequence, true, true};
    case Variant::LocalOnly: return {PlannerMode::Llm, true, false};
    case Variant::GlobalOnly: return {PlannerMode::Llm, false, true};
    }
    return {};
}

void apply_variant(RunConfig& config, Variant v) {
    VariantConfig mapped = variant_mapping(v);
    config.planner_mode = mapped.planner_mode;
    config.allow_local = mapped.allow_local;
    config.allow_global = mapped.allow_global;
}

ScriptedPolicy default_scripted_policy() {
    ScriptedPolicy policy;
    PromptMatcher plan;
    plan.purpose = "plan";
    policy.rules.push_back({plan, responders::constant(
                                      R"([{"action_type": "local+global aggregate"}])")});
    PromptMatcher predict;
    predict.purpose = "predict";
    policy.rules.push_back({predict, responders::majority_label()});
    policy.default_response = responders::constant(R"([{"action_type": "no_op"}])");
    return policy;
}

namespace {

namespace fs = std::filesystem;

struct CellStats {
    std::vector<double> accuracies;
    double fallback_sum = 0.0;
    double llm_call_sum = 0.0;
    double runtime_sum = 0.0;
};

std::unique_ptr<EmbeddingProvider> make_embedder(const EmbedderChoice& choice) {
    if (choice.kind == "hash") {
        return std::make_unique<HashEmbedder>(choice.dim, choice.seed);
    }
    if (choice.kind == "http") {
        return std::make_unique<HttpEmbedder>(choice.http);
    }
    throw ConfigError("unknown embedding kind: " + choice.kind);
}

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& config,
                                          TranscriptLogger* logger) {
    switch (config.kind) {
    case BackendKind::Http: return std::make_unique<HttpChatBackend>(config, logger);
    case BackendKind::Scripted:
        return std::make_unique<ScriptedBackend>(default_scripted_policy(), logger);
    case BackendKind::Replay:
        if (config.replay_path.empty()) {
            throw ConfigError("replay backend requires a transcript path");
        }
        return std::make_unique<ReplayBackend>(config.replay_path, logger);
    }
    throw ConfigError("unknown backend kind");
}

nlohmann::ordered_json rows_json(const std::vector<ReportRow>& rows) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const ReportRow& row : rows) {
        nlohmann::ordered_json j;
        j["variant"] = row.variant;
        j["strategy"] = row.strategy;
        j["dataset"] = row.dataset;
        j["mean_accuracy"] = row.mean_accuracy;
        if (row.std_accuracy) {
            j["std_accuracy"] = *row.std_accuracy;
        } else {
            j["std_accuracy"] = nullptr;
        }
        j["fallback_rate"] = row.fallback_rate;
        j["llm_calls"] = row.llm_calls;
        j["runtime_seconds"] = row.runtime_seconds;
        j["seed_count"] = row.seed_count;
        arr.push_back(std::move(j));
    }
    return arr;
}

std::string format_fixed(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
    return buf;
}

// "62.11" or "62.11 ± 0.84", percent scale.
std::string accuracy_cell(const ReportRow& row) {
    std::string cell = format_fixed(row.mean_accuracy * 100.0, 2);
    if (row.std_accuracy) cell += " ± " + format_fixed(*row.std_accuracy * 100.0, 2);
    return cell;
}

void emit_markdown(const std::vector<ReportRow>& rows, std::ostream& out) {
    std::vector<std::string> datasets;
    std::vector<std::string> strategies;
    std::vector<std::string> variants;
    for (const ReportRow& row : rows) {
        if (std::find(datasets.begin(), datasets.end(), row.dataset) == datasets.end()) {
            datasets.push_back(row.dataset);
        }
        if (std::find(strategies.begin(), strategies.end(), row.strategy) == strategies.end()) {
            strategies.push_back(row.strategy);
        }
        if (std::find(variants.begin(), variants.end(), row.variant) == variants.end()) {
            variants.push_back(row.variant);
        }
    }

    out << "# Results\n\n";
    out << "Accuracy is the mean over seeds, in percent; the spread is the sample"
           " standard deviation, shown when more than one seed ran.\n";
    for (const std::string& dataset : datasets) {
        out << "\n## " << dataset << "\n\n";
        out << "| Variant |";
        for (const std::string& s : strategies) out << " Strategy " << s << " |";
        out << "\n| --- |";
        for (std::size_t i = 0; i < strategies.size(); ++i) out << " --- |";
        out << "\n";
        for (const std::string& variant : variants) {
            out << "| " << variant << " |";
            for (const std::string& strategy : strategies) {
                std::string cell = "n/a";
                for (const ReportRow& row : rows) {
                    if (row.dataset == dataset && row.variant == variant &&
                        row.strategy == strategy) {
                        cell = accuracy_cell(row);
                        break;
                    }
                }
                out << " " << cell << " |";
            }
            out << "\n";
        }
    }

    out << "\n## Detail\n\n";
    out << "| Variant | Strategy | Dataset | Accuracy (%) | Fallback rate | LLM calls |"
           " Runtime (s) | Seeds |\n";
    out << "| --- | --- | --- | --- | --- | --- | --- | --- |\n";
    for (const ReportRow& row : rows) {
        out << "| " << row.variant << " | " << row.strategy << " | " << row.dataset << " | "
            << accuracy_cell(row) << " | " << format_fixed(row.fallback_rate, 4) << " | "
            << format_fixed(row.llm_calls, 1) << " | " << format_fixed(row.runtime_seconds, 3)
            << " | " << row.seed_count << " |\n";
    }
}

void emit_csv(const std::vector<ReportRow>& rows, std::ostream& out) {
    out << "variant,strategy,dataset,mean_accuracy,std_accuracy,fallback_rate,llm_calls,"
           "runtime_seconds,seed_count\n";
    for (const ReportRow& row : rows) {
        out << row.variant << "," << row.strategy << "," << row.dataset << ","
            << format_fixed(row.mean_accuracy, 6) << ",";
        if (row.std_accuracy) out << format_fixed(*row.std_accuracy, 6);
        out << "," << format_fixed(row.fallback_rate, 6) << "," << format_fixed(row.llm_calls, 2)
            << "," << format_fixed(row.runtime_seconds, 4) << "," << row.seed_count << "\n";
    }
}

} // namespace

std::vector<ReportRow> run_experiment(const ExperimentSpec& spec) {
    if (spec.variants.empty()) throw ConfigError("no variants selected");
    if (spec.strategies.empty()) throw ConfigError("no strategies selected");
    if (spec.seeds.empty()) throw ConfigError("no seeds selected");

    TextAttributedGraph base = load_graph(spec.dataset.nodes, spec.dataset.edges);
    fs::create_directories(spec.out_dir);

    std::vector<ReportRow> rows;
    for (Variant variant : spec.variants) {
        for (Strategy strategy : spec.strategies) {
            CellStats stats;
            for (std::uint64_t seed : spec.seeds) {
                TextAttributedGraph g = base;
                SplitAssignment assignment =
                    spec.dataset.splits.empty()
                        ? make_splits(g, spec.train_ratio, spec.val_ratio, spec.test_ratio, seed)
                        : load_splits(g, spec.dataset.splits);
                apply_splits(g, assignment);

                fs::path run_dir = fs::path(spec.out_dir) /
                                   (variant_name(variant) + "_" + strategy_name(strategy)) /
                                   ("seed_" + std::to_string(seed));
                fs::create_directories(run_dir);

                TranscriptLogger transcript((run_dir / "transcript.jsonl").string());

                RunConfig config = spec.run;
                apply_variant(config, variant);
                config.strategy = strategy;
                config.seeds = {seed};

                std::unique_ptr<ChatBackend> backend =
                    make_backend(config.backend, &transcript);

                if (spec.precompress) {
                    compress_texts(g, [&](NodeId v, const std::string& text) {
                        ChatRequest request;
                        request.system_text = system_text();
                        request.user_text = summarize_prompt(text);
                        request.max_output_tokens = config.max_output_tokens;
                        request.temperature = config.temperature;
                        request.request_tag = "n" + std::to_string(v) + ".compress";
                        return backend->complete(request);
                    });
                }

                std::unique_ptr<EmbeddingProvider> embedder = make_embedder(spec.embedding);
                SemanticIndex index;
                if (config.allow_global) {
                    index = spec.dataset.index.empty()
                                ? build_index(g, *embedder)
                                : load_index(spec.dataset.index, g);
                }

                EngineServices services;
                services.backend = backend.get();
                services.embedder = embedder.get();
                services.index = &index;

                RunResult result = run_inference(g, config, services);
                write_metrics_json(result.metrics, (run_dir / "metrics.json").string());
                write_predictions_csv(result, g, (run_dir / "predictions.csv").string());
                write_trace_jsonl(result, (run_dir / "trace.jsonl").string());

                stats.accuracies.push_back(result.metrics.accuracy);
                stats.fallback_sum += result.metrics.parse_fallback_rate;
                stats.llm_call_sum += static_cast<double>(result.metrics.llm_calls);
                stats.runtime_sum += result.metrics.wall_clock_seconds;
            }

            ReportRow row;
            row.variant = variant_name(variant);
            row.strategy = strategy_name(strategy);
            row.dataset = spec.dataset_name;
            row.seed_count = stats.accuracies.size();
            double n = static_cast<double>(stats.accuracies.size());
            double mean = 0.0;
            for (double a : stats.accuracies) mean += a;
            mean /= n;
            row.mean_accuracy = mean;
            if (stats.accuracies.size() > 1) {
                double ss = 0.0;
                for (double a : stats.accuracies) ss += (a - mean) * (a - mean);
                row.std_accuracy = std::sqrt(ss / (n - 1.0));
            }
            row.fallback_rate = stats.fallback_sum / n;
            row.llm_calls = stats.llm_call_sum / n;
            row.runtime_seconds = stats.runtime_sum / n;
            rows.push_back(std::move(row));
        }
    }

    std::ofstream out(fs::path(spec.out_dir) / "rows.json", std::ios::binary);
    if (!out) throw IoError("cannot write " + spec.out_dir + "/rows.json");
    out << rows_json(rows).dump(2) << "\n";
    return rows;
}

std::optional<ReportFormat> report_format_from_name(const std::string& name) {
    if (name == "md" || name == "markdown") return ReportFormat::Markdown;
    if (name == "csv") return ReportFormat::Csv;
    if (name == "json") return ReportFormat::Json;
    return std::nullopt;
}

void emit_report(const std::vector<ReportRow>& rows, ReportFormat format,
                 const std::string& out_path) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + out_path);
    switch (format) {
    case ReportFormat::Markdown: emit_markdown(rows, out); break;
    case ReportFormat::Csv: emit_csv(rows, out); break;
    case ReportFormat::Json: out << rows_json(rows).dump(2) << "\n"; break;
    }
}

std::vector<ReportRow> load_rows(const std::string& rows_json_path) {
    std::ifstream in(rows_json_path, std::ios::binary);
    if (!in) throw IoError("cannot read " + rows_json_path);
    nlohmann::json parsed;
    try {
        in >> parsed;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(rows_json_path + ": " + e.what());
    }
    if (!parsed.is_array()) throw IoError(rows_json_path + ": expected a JSON array");

    std::vector<ReportRow> rows;
    for (const auto& j : parsed) {
        ReportRow row;
        row.variant = j.at("variant").get<std::string>();
        row.strategy = j.at("strategy").get<std::string>();
        row.dataset = j.at("dataset").get<std::string>();
        row.mean_accuracy = j.at("mean_accuracy").get<double>();
        if (j.contains("std_accuracy") && !j.at("std_accuracy").is_null()) {
            row.std_accuracy = j.at("std_accuracy").get<double>();
        }
        row.fallback_rate = j.at("fallback_rate").get<double>();
        row.llm_calls = j.at("llm_calls").get<double>();
        row.runtime_seconds = j.at("runtime_seconds").get<double>();
        row.seed_count = j.at("seed_count").get<std::size_t>();
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace reagan
