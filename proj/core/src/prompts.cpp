#include "reagan/prompts.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <regex>

#include <json.hpp>

#include "reagan/errors.hpp"
#include "reagan/text_util.hpp"

namespace reagan {

namespace {

constexpr const char* kPlanningTemplate =
    R"(You are a node in a text-attributed graph. Your goal is to plan the next action(s) for yourself based on your current context, including memory, text features, and neighbors.

You may choose one of the following actions:
- local aggregate: aggregate structure neighbors' text features and store the labeled nodes in memory.
- global aggregate: retrieve semantically similar nodes from the whole graph and aggregate the text.
- local+global aggregate: perform both local and global aggregation in this step.
- no_op: do nothing and move to the next layer.

Node State:
- Text Feature: "{original_text}"
- Last Local Aggregated Text Feature: "{local_agg}"
- Last Global Aggregated Text Feature: "{global_agg}"
- Memory: Contains {example_count} labeled examples.

Labeled Examples in Memory:
Local:
{local_examples}
Global:
{global_examples}

Planning Your Steps:
- Think like a planner: Your goal is to gather enough information for the final label prediction.
- If you cannot predict the label yet (need more context to do prediction), please choose local aggregate or global aggregate.
- If local memory is not enough, do local aggregation; meanwhile, if global memory is not enough, do global aggregation. Their amount is better to be in balance.
- Otherwise, choose "no_op".

Respond strictly in JSON:
[
  {"action_type": "local aggregate", "global aggregate" or "no_op"},
  {"action_type": "local aggregate", "global aggregate" or "no_op"}
])";

constexpr const char* kPredictionTemplate =
    R"(You are a label prediction agent. You will be given a new node's aggregated text feature along with a memory of labeled examples.
Use the memory to infer the most likely label for this node.
Respond strictly in the required JSON format.

Node State:
- Text Feature: "{original_text}"
- Local Aggregated Text Feature: "{local_agg}"
- Global Aggregated Text Feature: "{global_agg}"

Labeled Examples in Memory:
Local:
{local_examples}
Global:
{global_examples}

Your task is to choose the most appropriate label from the following candidates:
{label_candidates}

Please follow these steps in your analysis:
1. Analyze the Current Node Text:
- Identify primary topics and application domain
- Determine the specific problem being solved
- Note core methodologies and algorithms
2. Analyze Memory Examples:
- Understand application domains for each label
- Identify types of problems addressed
- Note underlying methodologies
3. Compare and Weigh Evidence:
- Prioritize domain and problem alignment
- Evaluate methodological congruence
- Consider both domain-specific techniques and general paradigms
- Ensure holistic coherence in your decision
4. Avoid over-reliance on isolated keywords

Please think step by step:
First, analyze memory examples and their labels, then compare them to the input text. Identify the most semantically similar memory items and explain why. Finally, decide which label best matches and explain your reasoning.

Respond strictly in JSON:
{"action_type": "predict", "predicted_label": "Label ID"})";

constexpr const char* kSystemText =
    "You are a node agent in a text-attributed graph. Reply strictly in the requested JSON "
    "format.";

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

std::string render_example_lines(const std::vector<SelectedExample>& examples,
                                 MemorySource source, std::size_t keep,
                                 const LabelSpace& labels, LabelVisibility visibility) {
    std::vector<std::string> lines;
    for (const SelectedExample& ex : examples) {
        if (ex.source != source) continue;
        if (lines.size() >= keep) break;
        lines.push_back("- " + rendered_label(labels, ex.label, visibility) + ": \"" + ex.text +
                        "\"");
    }
    if (lines.empty()) return "(none)";
    return join(lines, "\n");
}

std::string candidate_list(const LabelSpace& labels, LabelVisibility visibility) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(labels.class_count()));
    for (int i = 0; i < labels.class_count(); ++i) {
        names.push_back("\"" + rendered_label(labels, i, visibility) + "\"");
    }
    return "[" + join(names, ", ") + "]";
}

// Fills the shared slots, shrinking the example sections from the tail
// (global first) until the budget fits. Throws BudgetUnderflow when even the
// example-free prompt is too long.
std::string assemble_with_budget(const std::string& tpl,
                                 const std::map<std::string, std::string>& fixed_slots,
                                 const std::vector<SelectedExample>& examples,
                                 const LabelSpace& labels, const PromptOptions& options) {
    std::size_t local_n = 0;
    std::size_t global_n = 0;
    for (const SelectedExample& ex : examples) {
        if (ex.source == MemorySource::Local) ++local_n;
        if (ex.source == MemorySource::Global) ++global_n;
    }
    while (true) {
        std::string prompt = tpl;
        for (const auto& [key, value] : fixed_slots) {
            prompt = replace_all(prompt, "{" + key + "}", value);
        }
        prompt = replace_all(prompt, "{local_examples}",
                             render_example_lines(examples, MemorySource::Local, local_n,
                                                  labels, options.visibility));
        prompt = replace_all(prompt, "{global_examples}",
                             render_example_lines(examples, MemorySource::Global, global_n,
                                                  labels, options.visibility));
        if (count_tokens(prompt) <= options.budget.max_prompt_tokens) return prompt;
        if (global_n > 0) {
            --global_n;
        } else if (local_n > 0) {
            --local_n;
        } else {
            throw BudgetUnderflow("prompt preamble exceeds " +
                                  std::to_string(options.budget.max_prompt_tokens) + " tokens");
        }
    }
}

} // namespace

std::string label_visibility_name(LabelVisibility v) {
    return v == LabelVisibility::Anonymized ? "anonymized" : "named";
}

std::string action_name(ActionKind kind) {
    switch (kind) {
    case ActionKind::LocalAggregate: return "local aggregate";
    case ActionKind::GlobalAggregate: return "global aggregate";
    case ActionKind::NoOp: return "no_op";
    }
    return "no_op";
}

std::string planning_template() { return kPlanningTemplate; }
std::string prediction_template() { return kPredictionTemplate; }
std::string system_text() { return kSystemText; }

std::string rendered_label(const LabelSpace& labels, int idx, LabelVisibility visibility) {
    if (visibility == LabelVisibility::Named && idx >= 0 &&
        idx < static_cast<int>(labels.display_names.size())) {
        return labels.display_names[static_cast<std::size_t>(idx)];
    }
    return "Label " + std::to_string(idx);
}

std::string build_planning_prompt(const MemoryBuffer& buffer, const LabelSpace& labels,
                                  const PromptOptions& options) {
    auto examples = select_examples(buffer, options.strategy, options.local_limit,
                                    options.global_limit);
    std::map<std::string, std::string> slots;
    slots["original_text"] = buffer.original_text();
    slots["local_agg"] = buffer.current_aggregate(MemorySource::Local);
    slots["global_agg"] = buffer.current_aggregate(MemorySource::Global);
    slots["example_count"] = std::to_string(buffer.labeled_example_count());
    return assemble_with_budget(kPlanningTemplate, slots, examples, labels, options);
}

std::string build_prediction_prompt(const MemoryBuffer& buffer, const LabelSpace& labels,
                                    const PromptOptions& options) {
    auto examples = select_examples(buffer, options.strategy, options.local_limit,
                                    options.global_limit);
    std::map<std::string, std::string> slots;
    slots["original_text"] = buffer.original_text();
    slots["local_agg"] = buffer.current_aggregate(MemorySource::Local);
    slots["global_agg"] = buffer.current_aggregate(MemorySource::Global);
    slots["label_candidates"] = candidate_list(labels, options.visibility);
    return assemble_with_budget(kPredictionTemplate, slots, examples, labels, options);
}

std::string reask_suffix() {
    return "Your previous reply could not be parsed. Respond with exactly one JSON object of "
           "the form {\"action_type\": \"predict\", \"predicted_label\": \"Label ID\"} and no "
           "other text.";
}

namespace {

// First substring that parses as JSON with the given bracket pair; candidates
// that fail to parse are skipped.
std::optional<nlohmann::json> first_json_value(const std::string& text, char open, char close) {
    for (std::size_t i = text.find(open); i != std::string::npos; i = text.find(open, i + 1)) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t j = i; j < text.size(); ++j) {
            char c = text[j];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == open) {
                ++depth;
            } else if (c == close) {
                --depth;
                if (depth == 0) {
                    try {
                        return nlohmann::json::parse(text.substr(i, j - i + 1));
                    } catch (const nlohmann::json::exception&) {
                        break; // malformed candidate, try the next opener
                    }
                }
            }
        }
    }
    return std::nullopt;
}

std::optional<std::vector<ActionKind>> map_action_name(const std::string& raw) {
    std::string name = collapse_spaces(to_lower(trim(raw)));
    if (name == "local aggregate") {
        return std::vector<ActionKind>{ActionKind::LocalAggregate};
    }
    if (name == "global aggregate") {
        return std::vector<ActionKind>{ActionKind::GlobalAggregate};
    }
    if (name == "local+global aggregate") {
        return std::vector<ActionKind>{ActionKind::LocalAggregate, ActionKind::GlobalAggregate};
    }
    if (name == "no_op") {
        return std::vector<ActionKind>{ActionKind::NoOp};
    }
    return std::nullopt;
}

} // namespace

ActionPlan parse_action_plan(const std::string& reply) {
    ActionPlan plan;
    plan.raw_text = reply;

    auto fallback = [&plan] {
        plan.actions = {ActionKind::NoOp};
        plan.fallback = true;
        return plan;
    };

    auto array = first_json_value(reply, '[', ']');
    if (!array || !array->is_array() || array->empty()) return fallback();

    std::vector<ActionKind> mapped;
    for (const auto& element : *array) {
        std::string name;
        if (element.is_object() && element.contains("action_type") &&
            element["action_type"].is_string()) {
            name = element["action_type"].get<std::string>();
        } else if (element.is_string()) {
            name = element.get<std::string>();
        } else {
            return fallback();
        }
        auto kinds = map_action_name(name);
        if (!kinds) return fallback();
        mapped.insert(mapped.end(), kinds->begin(), kinds->end());
    }

    bool has_work = std::any_of(mapped.begin(), mapped.end(),
                                [](ActionKind k) { return k != ActionKind::NoOp; });
    std::vector<ActionKind> actions;
    for (ActionKind k : mapped) {
        if (has_work && k == ActionKind::NoOp) continue;
        if (std::find(actions.begin(), actions.end(), k) != actions.end()) continue;
        actions.push_back(k);
    }
    if (actions.size() > 2) actions.resize(2);
    plan.actions = std::move(actions);
    return plan;
}

std::string render_action_plan(const std::vector<ActionKind>& actions) {
    std::vector<std::string> parts;
    parts.reserve(actions.size());
    for (ActionKind k : actions) {
        parts.push_back("{\"action_type\": \"" + action_name(k) + "\"}");
    }
    return "[" + join(parts, ", ") + "]";
}

Prediction parse_prediction(const std::string& reply, const LabelSpace& labels) {
    auto object = first_json_value(reply, '{', '}');
    if (!object || !object->is_object() || !object->contains("predicted_label")) {
        throw InvalidPrediction("reply carries no predicted_label object");
    }

    const auto& value = (*object)["predicted_label"];
    int idx = -1;
    if (value.is_number_integer()) {
        idx = value.get<int>();
    } else if (value.is_string()) {
        std::string s = value.get<std::string>();
        static const std::regex label_pattern(R"(^\s*label[\s_]*([0-9]+)\s*$)",
                                              std::regex::icase);
        std::smatch match;
        if (std::regex_match(s, match, label_pattern)) {
            idx = std::stoi(match[1].str());
        } else {
            std::string lowered = to_lower(trim(s));
            for (int i = 0; i < labels.class_count(); ++i) {
                if (to_lower(labels.display_names[static_cast<std::size_t>(i)]) == lowered) {
                    idx = i;
                    break;
                }
            }
            if (idx < 0) throw InvalidPrediction("unrecognized label: " + s);
        }
    } else {
        throw InvalidPrediction("predicted_label is neither string nor integer");
    }

    if (idx < 0 || idx >= labels.class_count()) {
        throw InvalidPrediction("label index " + std::to_string(idx) + " outside [0, " +
                                std::to_string(labels.class_count()) + ")");
    }
    return {idx, reply};
}

} // namespace reagan
