#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "reagan/config.hpp"
#include "reagan/errors.hpp"
#include "reagan/experiment.hpp"
#include "reagan/graph.hpp"
#include "reagan/retrieval.hpp"

namespace {

namespace fs = std::filesystem;

std::string describe_accuracy(const reagan::ReportRow& row) {
    char buf[64];
    if (row.std_accuracy) {
        std::snprintf(buf, sizeof(buf), "%.4f +/- %.4f", row.mean_accuracy, *row.std_accuracy);
    } else {
        std::snprintf(buf, sizeof(buf), "%.4f", row.mean_accuracy);
    }
    return buf;
}

int cmd_run(const std::string& config_path, const std::string& variant,
            const std::string& strategy, int seed_count, const std::string& backend,
            const std::string& out_dir) {
    reagan::ExperimentSpec spec = reagan::load_config_file(config_path);
    if (!variant.empty()) {
        auto v = reagan::variant_from_name(variant);
        if (!v) throw reagan::ConfigError("unknown variant: " + variant);
        spec.variants = {*v};
    }
    if (!strategy.empty()) {
        auto s = reagan::strategy_from_name(strategy);
        if (!s) throw reagan::ConfigError("unknown strategy: " + strategy);
        spec.strategies = {*s};
    }
    if (seed_count > 0) {
        spec.seeds.clear();
        for (int i = 1; i <= seed_count; ++i) {
            spec.seeds.push_back(static_cast<std::uint64_t>(i));
        }
    }
    if (!backend.empty()) {
        auto kind = reagan::backend_kind_from_name(backend);
        if (!kind) throw reagan::ConfigError("unknown backend kind: " + backend);
        spec.run.backend.kind = *kind;
    }
    if (!out_dir.empty()) spec.out_dir = out_dir;

    std::vector<reagan::ReportRow> rows = reagan::run_experiment(spec);
    for (const reagan::ReportRow& row : rows) {
        std::cout << row.variant << "/" << row.strategy << " on " << row.dataset
                  << ": accuracy " << describe_accuracy(row) << " over " << row.seed_count
                  << " seed(s), fallback rate " << row.fallback_rate << ", mean llm calls "
                  << row.llm_calls << "\n";
    }
    std::cout << "artifacts written under " << spec.out_dir << "\n";
    return 0;
}

int cmd_report(const std::string& in_dir, const std::string& format_name, std::string out_path) {
    auto format = reagan::report_format_from_name(format_name);
    if (!format) throw reagan::ConfigError("unknown report format: " + format_name);

    fs::path rows_path = fs::path(in_dir) / "rows.json";
    std::vector<reagan::ReportRow> rows = reagan::load_rows(rows_path.string());

    if (out_path.empty()) {
        const char* ext = format_name == "json" ? "report.json"
                          : format_name == "csv" ? "report.csv"
                                                 : "report.md";
        out_path = (fs::path(in_dir) / ext).string();
    }
    reagan::emit_report(rows, *format, out_path);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmd_index(const std::string& nodes, const std::string& edges, const std::string& out_path,
              std::size_t dim, std::uint64_t seed) {
    reagan::TextAttributedGraph graph = reagan::load_graph(nodes, edges);
    reagan::HashEmbedder embedder(dim, seed);
    reagan::SemanticIndex index = reagan::build_index(graph, embedder);
    reagan::save_index(index, out_path);
    std::cout << "indexed " << index.entries.size() << " nodes at dim " << index.dim << " into "
              << out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Node-as-agent graph reasoning runner"};
    app.require_subcommand(1);

    std::string config_path;
    std::string variant;
    std::string strategy;
    int seed_count = 0;
    std::string backend;
    std::string out_dir;
    CLI::App* run = app.add_subcommand("run", "Run an experiment from a config file");
    run->add_option("--config", config_path, "Experiment config file")->required();
    run->add_option("--variant", variant, "Restrict to one variant");
    run->add_option("--strategy", strategy, "Restrict to one strategy (A or B)");
    run->add_option("--seeds", seed_count, "Run seeds 1..n")->check(CLI::PositiveNumber);
    run->add_option("--backend", backend, "Override backend kind (http, scripted, replay)");
    run->add_option("--out", out_dir, "Override output directory");

    std::string report_in;
    std::string report_format = "md";
    std::string report_out;
    CLI::App* report = app.add_subcommand("report", "Render a report from run artifacts");
    report->add_option("--in", report_in, "Directory holding rows.json")->required();
    report->add_option("--format", report_format, "md, csv, or json");
    report->add_option("--out", report_out, "Output file (defaults into --in)");

    std::string index_nodes;
    std::string index_edges;
    std::string index_out;
    std::size_t index_dim = 64;
    std::uint64_t index_seed = 0;
    CLI::App* index = app.add_subcommand("index", "Build an embedding index sidecar");
    index->add_option("--nodes", index_nodes, "Node JSONL file")->required();
    index->add_option("--edges", index_edges, "Edge CSV file")->required();
    index->add_option("--out", index_out, "Index output file")->required();
    index->add_option("--dim", index_dim, "Hash embedder dimension");
    index->add_option("--seed", index_seed, "Hash embedder seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return cmd_run(config_path, variant, strategy, seed_count, backend, out_dir);
        }
        if (report->parsed()) {
            return cmd_report(report_in, report_format, report_out);
        }
        if (index->parsed()) {
            return cmd_index(index_nodes, index_edges, index_out, index_dim, index_seed);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
