#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "reagan/memory.hpp"
#include "reagan/types.hpp"

namespace reagan {

struct PromptBudget {
    std::size_t max_prompt_tokens = 512;
};

enum class ActionKind { LocalAggregate, GlobalAggregate, NoOp };

enum class LabelVisibility { Anonymized, Named };

std::string label_visibility_name(LabelVisibility v);

// The action name as it appears in prompts and planner replies.
std::string action_name(ActionKind kind);

struct ActionPlan {
    std::vector<ActionKind> actions;
    std::string raw_text;
    bool fallback = false; // reply was unparseable or named an unknown action
};

struct Prediction {
    int label_index = -1;
    std::string raw_text;
};

struct PromptOptions {
    Strategy strategy = Strategy::A;
    PromptBudget budget;
    LabelVisibility visibility = LabelVisibility::Anonymized;
    std::size_t local_limit = 5;
    std::size_t global_limit = 5;
};

// Raw template texts with {placeholder} slots, for inspection.
std::string planning_template();
std::string prediction_template();
std::string system_text();
constexpr int kTemplateVersion = 1;

// The label string rendered into prompts for class index `idx`.
std::string rendered_label(const LabelSpace& labels, int idx, LabelVisibility visibility);

// Assembles the planning prompt from the buffer's previous-layer state.
// Examples over budget are dropped from the tail, last global example first,
// then local; the preamble, node state and schema are never dropped and
// raise BudgetUnderflow if they alone exceed the budget.
std::string build_planning_prompt(const MemoryBuffer& buffer, const LabelSpace& labels,
                                  const PromptOptions& options);

std::string build_prediction_prompt(const MemoryBuffer& buffer, const LabelSpace& labels,
                                    const PromptOptions& options);

// Appended to the original prompt for the engine's single re-ask.
std::string reask_suffix();

// First JSON array in the reply, mapped over the documented action names.
// Unknown names and array-free replies produce {NoOp} with fallback set.
ActionPlan parse_action_plan(const std::string& reply);

// Canonical reply text for a plan, parse_action_plan's inverse.
std::string render_action_plan(const std::vector<ActionKind>& actions);

// First JSON object's predicted_label, matched case-insensitively against
// "Label <k>" / "Label_<k>" / display names; throws InvalidPrediction.
Prediction parse_prediction(const std::string& reply, const LabelSpace& labels);

} // namespace reagan
