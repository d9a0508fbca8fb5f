#include "reagan/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "reagan/errors.hpp"

namespace reagan {

namespace {

struct ConfigValue {
    enum class Type { String, Int, Float, Bool, Array };
    Type type = Type::String;
    std::string s;
    long long i = 0;
    double f = 0.0;
    bool b = false;
    std::vector<ConfigValue> items;
    int line = 0;
};

struct ParseState {
    std::string origin;
    // section -> key -> value; insertion order does not matter.
    std::map<std::string, std::map<std::string, ConfigValue>> sections;
};

[[noreturn]] void fail(const std::string& origin, int line, const std::string& reason) {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + reason);
}

std::string strip_ws(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Cuts an unquoted # comment; respects double-quoted spans.
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (in_string) {
            if (c == '\\') {
                ++i;
            } else if (c == '"') {
                in_string = false;
            }
        } else if (c == '"') {
            in_string = true;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

std::string parse_quoted(const std::string& raw, const std::string& origin, int line) {
    std::string out;
    std::size_t i = 1;
    while (i < raw.size()) {
        char c = raw[i];
        if (c == '"') {
            if (i + 1 != raw.size()) fail(origin, line, "trailing characters after string");
            return out;
        }
        if (c == '\\') {
            ++i;
            if (i >= raw.size()) fail(origin, line, "dangling escape in string");
            switch (raw[i]) {
            case '"': out += '"'; break;
            case '\\': out += '\\'; break;
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            default: fail(origin, line, "unsupported escape in string");
            }
        } else {
            out += c;
        }
        ++i;
    }
    fail(origin, line, "unterminated string");
}

ConfigValue parse_scalar(const std::string& raw, const std::string& origin, int line) {
    ConfigValue v;
    v.line = line;
    if (raw.empty()) fail(origin, line, "empty value");
    if (raw.front() == '"') {
        v.type = ConfigValue::Type::String;
        v.s = parse_quoted(raw, origin, line);
        return v;
    }
    if (raw == "true" || raw == "false") {
        v.type = ConfigValue::Type::Bool;
        v.b = raw == "true";
        return v;
    }
    bool integral = true;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        char c = raw[i];
        if (i == 0 && (c == '+' || c == '-')) continue;
        if (c < '0' || c > '9') {
            integral = false;
            break;
        }
    }
    if (integral && raw != "+" && raw != "-") {
        v.type = ConfigValue::Type::Int;
        v.i = std::strtoll(raw.c_str(), nullptr, 10);
        return v;
    }
    char* end = nullptr;
    double f = std::strtod(raw.c_str(), &end);
    if (end != nullptr && *end == '\0' && end != raw.c_str()) {
        v.type = ConfigValue::Type::Float;
        v.f = f;
        return v;
    }
    fail(origin, line, "cannot parse value: " + raw);
}

ConfigValue parse_value(const std::string& raw, const std::string& origin, int line) {
    if (!raw.empty() && raw.front() == '[') {
        if (raw.back() != ']') fail(origin, line, "unterminated array");
        ConfigValue v;
        v.type = ConfigValue::Type::Array;
        v.line = line;
        std::string body = raw.substr(1, raw.size() - 2);
        std::string item;
        bool in_string = false;
        for (std::size_t i = 0; i < body.size(); ++i) {
            char c = body[i];
            if (in_string) {
                item += c;
                if (c == '\\' && i + 1 < body.size()) {
                    item += body[++i];
                } else if (c == '"') {
                    in_string = false;
                }
            } else if (c == '"') {
                item += c;
                in_string = true;
            } else if (c == ',') {
                std::string trimmed = strip_ws(item);
                if (trimmed.empty()) fail(origin, line, "empty array element");
                v.items.push_back(parse_scalar(trimmed, origin, line));
                item.clear();
            } else {
                item += c;
            }
        }
        std::string trimmed = strip_ws(item);
        if (!trimmed.empty()) {
            v.items.push_back(parse_scalar(trimmed, origin, line));
        } else if (!v.items.empty()) {
            fail(origin, line, "trailing comma in array");
        }
        return v;
    }
    return parse_scalar(raw, origin, line);
}

ParseState parse_lines(const std::string& text, const std::string& origin) {
    ParseState state;
    state.origin = origin;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string body = strip_ws(strip_comment(line));
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']') fail(origin, line_no, "unterminated section header");
            section = strip_ws(body.substr(1, body.size() - 2));
            if (section.empty()) fail(origin, line_no, "empty section name");
            continue;
        }
        std::size_t eq = std::string::npos;
        bool in_string = false;
        for (std::size_t i = 0; i < body.size(); ++i) {
            char c = body[i];
            if (in_string) {
                if (c == '\\') ++i;
                else if (c == '"') in_string = false;
            } else if (c == '"') {
                in_string = true;
            } else if (c == '=') {
                eq = i;
                break;
            }
        }
        if (eq == std::string::npos) fail(origin, line_no, "expected key = value");
        std::string key = strip_ws(body.substr(0, eq));
        std::string raw = strip_ws(body.substr(eq + 1));
        if (key.empty()) fail(origin, line_no, "empty key");
        if (section.empty()) fail(origin, line_no, "key outside any section: " + key);
        auto& keys = state.sections[section];
        if (keys.count(key) != 0) fail(origin, line_no, "duplicate key: " + key);
        keys[key] = parse_value(raw, origin, line_no);
    }
    return state;
}

class SectionReader {
public:
    SectionReader(ParseState& state, std::string section)
        : state_(state), section_(std::move(section)) {
        auto it = state_.sections.find(section_);
        if (it != state_.sections.end()) values_ = &it->second;
    }

    bool present() const { return values_ != nullptr; }

    const ConfigValue* find(const std::string& key) {
        if (values_ == nullptr) return nullptr;
        auto it = values_->find(key);
        if (it == values_->end()) return nullptr;
        seen_.push_back(key);
        return &it->second;
    }

    std::string get_string(const std::string& key, std::string fallback) {
        const ConfigValue* v = find(key);
        if (v == nullptr) return fallback;
        require(*v, ConfigValue::Type::String, key);
        return v->s;
    }

    long long get_int(const std::string& key, long long fallback) {
        const ConfigValue* v = find(key);
        if (v == nullptr) return fallback;
        require(*v, ConfigValue::Type::Int, key);
        return v->i;
    }

    double get_float(const std::string& key, double fallback) {
        const ConfigValue* v = find(key);
        if (v == nullptr) return fallback;
        if (v->type == ConfigValue::Type::Int) return static_cast<double>(v->i);
        require(*v, ConfigValue::Type::Float, key);
        return v->f;
    }

    bool get_bool(const std::string& key, bool fallback) {
        const ConfigValue* v = find(key);
        if (v == nullptr) return fallback;
        require(*v, ConfigValue::Type::Bool, key);
        return v->b;
    }

    std::vector<std::string> get_string_array(const std::string& key) {
        const ConfigValue* v = find(key);
        if (v == nullptr) return {};
        require(*v, ConfigValue::Type::Array, key);
        std::vector<std::string> out;
        for (const ConfigValue& item : v->items) {
            if (item.type != ConfigValue::Type::String) {
                fail(state_.origin, v->line, section_ + "." + key + " must hold strings");
            }
            out.push_back(item.s);
        }
        return out;
    }

    std::vector<long long> get_int_array(const std::string& key) {
        const ConfigValue* v = find(key);
        if (v == nullptr) return {};
        require(*v, ConfigValue::Type::Array, key);
        std::vector<long long> out;
        for (const ConfigValue& item : v->items) {
            if (item.type != ConfigValue::Type::Int) {
                fail(state_.origin, v->line, section_ + "." + key + " must hold integers");
            }
            out.push_back(item.i);
        }
        return out;
    }

    void finish() {
        if (values_ == nullptr) return;
        for (const auto& [key, value] : *values_) {
            if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
                fail(state_.origin, value.line, "unknown key " + section_ + "." + key);
            }
        }
    }

private:
    void require(const ConfigValue& v, ConfigValue::Type type, const std::string& key) {
        if (v.type != type) {
            static const char* names[] = {"a string", "an integer", "a float", "a boolean",
                                          "an array"};
            fail(state_.origin, v.line,
                 section_ + "." + key + " must be " + names[static_cast<int>(type)]);
        }
    }

    ParseState& state_;
    std::string section_;
    std::map<std::string, ConfigValue>* values_ = nullptr;
    std::vector<std::string> seen_;
};

ActionKind action_from_config_name(const std::string& name, const std::string& origin) {
    if (name == "local_aggregate" || name == "local aggregate") return ActionKind::LocalAggregate;
    if (name == "global_aggregate" || name == "global aggregate") {
        return ActionKind::GlobalAggregate;
    }
    if (name == "no_op") return ActionKind::NoOp;
    throw ConfigError(origin + ": unknown action name: " + name);
}

} // namespace

ExperimentSpec parse_config_text(const std::string& text, const std::string& origin) {
    ParseState state = parse_lines(text, origin);
    ExperimentSpec spec;

    for (const auto& [section, keys] : state.sections) {
        if (section != "dataset" && section != "run" && section != "backend" &&
            section != "embedding" && section != "output") {
            throw ConfigError(origin + ": unknown section [" + section + "]");
        }
        (void)keys;
    }

    SectionReader dataset(state, "dataset");
    spec.dataset.nodes = dataset.get_string("nodes", "");
    spec.dataset.edges = dataset.get_string("edges", "");
    spec.dataset.splits = dataset.get_string("splits", "");
    spec.dataset.index = dataset.get_string("index", "");
    spec.dataset_name = dataset.get_string("name", spec.dataset_name);
    spec.train_ratio = dataset.get_float("train_ratio", spec.train_ratio);
    spec.val_ratio = dataset.get_float("val_ratio", spec.val_ratio);
    spec.test_ratio = dataset.get_float("test_ratio", spec.test_ratio);
    spec.precompress = dataset.get_bool("precompress", spec.precompress);
    dataset.finish();

    SectionReader run(state, "run");
    spec.run.layers = static_cast<int>(run.get_int("layers", spec.run.layers));
    spec.run.k = static_cast<std::size_t>(run.get_int("k", static_cast<long long>(spec.run.k)));
    spec.run.local_limit = static_cast<std::size_t>(
        run.get_int("local_limit", static_cast<long long>(spec.run.local_limit)));
    spec.run.global_limit = static_cast<std::size_t>(
        run.get_int("global_limit", static_cast<long long>(spec.run.global_limit)));
    spec.run.hops = static_cast<int>(run.get_int("hops", spec.run.hops));
    spec.run.char_budget = static_cast<std::size_t>(
        run.get_int("char_budget", static_cast<long long>(spec.run.char_budget)));
    spec.run.prompt_budget.max_prompt_tokens = static_cast<std::size_t>(run.get_int(
        "max_prompt_tokens", static_cast<long long>(spec.run.prompt_budget.max_prompt_tokens)));
    spec.run.max_output_tokens =
        static_cast<int>(run.get_int("max_output_tokens", spec.run.max_output_tokens));
    spec.run.temperature = run.get_float("temperature", spec.run.temperature);
    spec.run.failure_threshold = run.get_float("failure_threshold", spec.run.failure_threshold);
    spec.run.evaluate_all_nodes = run.get_bool("evaluate_all_nodes", spec.run.evaluate_all_nodes);
    spec.run.examples_use_raw_text =
        run.get_bool("examples_use_raw_text", spec.run.examples_use_raw_text);
    spec.run.workers = static_cast<int>(run.get_int("workers", spec.run.workers));

    std::string visibility =
        run.get_string("label_visibility", label_visibility_name(spec.run.label_visibility));
    if (visibility == "anonymized") {
        spec.run.label_visibility = LabelVisibility::Anonymized;
    } else if (visibility == "named") {
        spec.run.label_visibility = LabelVisibility::Named;
    } else {
        throw ConfigError(origin + ": unknown label_visibility: " + visibility);
    }

    std::string agg_mode = run.get_string("textagg_mode", textagg_mode_name(spec.run.textagg_mode));
    if (agg_mode == "concat") {
        spec.run.textagg_mode = TextAggMode::Concat;
    } else if (agg_mode == "summarize") {
        spec.run.textagg_mode = TextAggMode::Summarize;
    } else {
        throw ConfigError(origin + ": unknown textagg_mode: " + agg_mode);
    }

    std::vector<std::string> sequence = run.get_string_array("fixed_sequence");
    if (!sequence.empty()) {
        spec.run.fixed_sequence.clear();
        for (const std::string& name : sequence) {
            spec.run.fixed_sequence.push_back(action_from_config_name(name, origin));
        }
    }

    bool single_variant = run.find("variant") != nullptr;
    bool many_variants = run.find("variants") != nullptr;
    if (single_variant && many_variants) {
        throw ConfigError(origin + ": give either run.variant or run.variants, not both");
    }
    if (single_variant) {
        std::string name = run.get_string("variant", "");
        auto v = variant_from_name(name);
        if (!v) throw ConfigError(origin + ": unknown variant: " + name);
        spec.variants = {*v};
    } else if (many_variants) {
        spec.variants.clear();
        for (const std::string& name : run.get_string_array("variants")) {
            auto v = variant_from_name(name);
            if (!v) throw ConfigError(origin + ": unknown variant: " + name);
            spec.variants.push_back(*v);
        }
    }

    bool single_strategy = run.find("strategy") != nullptr;
    bool many_strategies = run.find("strategies") != nullptr;
    if (single_strategy && many_strategies) {
        throw ConfigError(origin + ": give either run.strategy or run.strategies, not both");
    }
    if (single_strategy) {
        std::string name = run.get_string("strategy", "");
        auto s = strategy_from_name(name);
        if (!s) throw ConfigError(origin + ": unknown strategy: " + name);
        spec.strategies = {*s};
    } else if (many_strategies) {
        spec.strategies.clear();
        for (const std::string& name : run.get_string_array("strategies")) {
            auto s = strategy_from_name(name);
            if (!s) throw ConfigError(origin + ": unknown strategy: " + name);
            spec.strategies.push_back(*s);
        }
    }

    if (run.find("seeds") != nullptr) {
        spec.seeds.clear();
        for (long long seed : run.get_int_array("seeds")) {
            if (seed < 0) throw ConfigError(origin + ": seeds must be non-negative");
            spec.seeds.push_back(static_cast<std::uint64_t>(seed));
        }
        if (spec.seeds.empty()) throw ConfigError(origin + ": run.seeds must not be empty");
    }
    run.finish();

    SectionReader backend(state, "backend");
    std::string backend_kind = backend.get_string("kind", backend_kind_name(spec.run.backend.kind));
    auto kind = backend_kind_from_name(backend_kind);
    if (!kind) throw ConfigError(origin + ": unknown backend kind: " + backend_kind);
    spec.run.backend.kind = *kind;
    spec.run.backend.endpoint_url = backend.get_string("endpoint", spec.run.backend.endpoint_url);
    spec.run.backend.model_name = backend.get_string("model", spec.run.backend.model_name);
    spec.run.backend.max_in_flight =
        static_cast<int>(backend.get_int("max_in_flight", spec.run.backend.max_in_flight));
    spec.run.backend.timeout_ms =
        static_cast<int>(backend.get_int("timeout_ms", spec.run.backend.timeout_ms));
    spec.run.backend.retry_limit =
        static_cast<int>(backend.get_int("retry_limit", spec.run.backend.retry_limit));
    spec.run.backend.backoff_base_ms =
        static_cast<int>(backend.get_int("backoff_base_ms", spec.run.backend.backoff_base_ms));
    spec.run.backend.replay_path = backend.get_string("replay", spec.run.backend.replay_path);
    backend.finish();

    SectionReader embedding(state, "embedding");
    spec.embedding.kind = embedding.get_string("kind", spec.embedding.kind);
    if (spec.embedding.kind != "hash" && spec.embedding.kind != "http") {
        throw ConfigError(origin + ": unknown embedding kind: " + spec.embedding.kind);
    }
    spec.embedding.dim = static_cast<std::size_t>(
        embedding.get_int("dim", static_cast<long long>(spec.embedding.dim)));
    long long embed_seed =
        embedding.get_int("seed", static_cast<long long>(spec.embedding.seed));
    if (embed_seed < 0) throw ConfigError(origin + ": embedding.seed must be non-negative");
    spec.embedding.seed = static_cast<std::uint64_t>(embed_seed);
    spec.embedding.http.endpoint_url =
        embedding.get_string("endpoint", spec.embedding.http.endpoint_url);
    spec.embedding.http.model_name = embedding.get_string("model", spec.embedding.http.model_name);
    spec.embedding.http.timeout_ms =
        static_cast<int>(embedding.get_int("timeout_ms", spec.embedding.http.timeout_ms));
    spec.embedding.http.retry_limit =
        static_cast<int>(embedding.get_int("retry_limit", spec.embedding.http.retry_limit));
    spec.embedding.http.backoff_base_ms = static_cast<int>(
        embedding.get_int("backoff_base_ms", spec.embedding.http.backoff_base_ms));
    spec.embedding.http.batch_size = static_cast<std::size_t>(
        embedding.get_int("batch_size", static_cast<long long>(spec.embedding.http.batch_size)));
    embedding.finish();

    SectionReader output(state, "output");
    spec.out_dir = output.get_string("dir", spec.out_dir);
    output.finish();

    if (spec.run.layers < 1) throw ConfigError(origin + ": run.layers must be at least 1");
    if (spec.run.workers < 1) throw ConfigError(origin + ": run.workers must be at least 1");
    if (spec.run.hops < 1) throw ConfigError(origin + ": run.hops must be at least 1");
    if (spec.run.failure_threshold < 0.0 || spec.run.failure_threshold > 1.0) {
        throw ConfigError(origin + ": run.failure_threshold must lie in [0, 1]");
    }
    if (spec.dataset.splits.empty()) {
        double sum = spec.train_ratio + spec.val_ratio + spec.test_ratio;
        if (spec.train_ratio < 0.0 || spec.val_ratio < 0.0 || spec.test_ratio < 0.0 ||
            sum < 1.0 - 1e-6 || sum > 1.0 + 1e-6) {
            throw ConfigError(origin + ": split ratios must be non-negative and sum to 1");
        }
    }
    if (spec.run.backend.kind == BackendKind::Http && spec.run.backend.endpoint_url.empty()) {
        throw ConfigError(origin + ": backend.endpoint is required for the http backend");
    }
    if (spec.run.backend.kind == BackendKind::Replay && spec.run.backend.replay_path.empty()) {
        throw ConfigError(origin + ": backend.replay is required for the replay backend");
    }
    if (spec.embedding.kind == "http" && spec.embedding.http.endpoint_url.empty()) {
        throw ConfigError(origin + ": embedding.endpoint is required for the http embedder");
    }
    return spec;
}

ExperimentSpec load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path);
}

} // namespace reagan
