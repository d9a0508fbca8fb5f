#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reagan/embedding.hpp"
#include "reagan/engine.hpp"
#include "reagan/types.hpp"

namespace reagan {

enum class Variant { Full, NoPlanning, LocalOnly, GlobalOnly };

std::string variant_name(Variant v);
std::optional<Variant> variant_from_name(const std::string& name);

struct VariantConfig {
    PlannerMode planner_mode = PlannerMode::Llm;
    bool allow_local = true;
    bool allow_global = true;
};

VariantConfig variant_mapping(Variant v);
void apply_variant(RunConfig& config, Variant v);

struct DatasetPaths {
    std::string nodes;
    std::string edges;
    std::string splits; // optional override file
    std::string index;  // optional prebuilt embedding sidecar
};

struct EmbedderChoice {
    std::string kind = "hash"; // hash | http
    std::size_t dim = 64;
    std::uint64_t seed = 0;
    EmbeddingHttpOptions http;
};

struct ExperimentSpec {
    DatasetPaths dataset;
    std::string dataset_name = "dataset";
    RunConfig run;
    std::vector<Variant> variants = {Variant::Full};
    std::vector<Strategy> strategies = {Strategy::A};
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    EmbedderChoice embedding;
    double train_ratio = 0.6;
    double val_ratio = 0.2;
    double test_ratio = 0.2;
    bool precompress = false;
    std::string out_dir = "out";
};

struct ReportRow {
    std::string variant;
    std::string strategy;
    std::string dataset;
    double mean_accuracy = 0.0;
    std::optional<double> std_accuracy; // present iff more than one seed
    double fallback_rate = 0.0;
    double llm_calls = 0.0; // mean per seed
    double runtime_seconds = 0.0;
    std::size_t seed_count = 0;
};

// Runs every (variant, strategy, seed) cell, writes per-run artifacts under
// spec.out_dir, and returns one aggregated row per (variant, strategy).
// Also writes <out_dir>/rows.json for later report emission.
std::vector<ReportRow> run_experiment(const ExperimentSpec& spec);

enum class ReportFormat { Markdown, Csv, Json };

std::optional<ReportFormat> report_format_from_name(const std::string& name);

void emit_report(const std::vector<ReportRow>& rows, ReportFormat format,
                 const std::string& out_path);

std::vector<ReportRow> load_rows(const std::string& rows_json_path);

// Plans "local+global aggregate" every layer and predicts by majority vote,
// the default deterministic mock for scripted runs.
ScriptedPolicy default_scripted_policy();

} // namespace reagan
