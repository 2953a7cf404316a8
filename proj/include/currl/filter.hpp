#pragma once

#include <cstddef>
#include <string>

#include "currl/corpus.hpp"
#include "currl/gateway.hpp"

namespace currl {

struct TaggedResponse {
    std::string think;
    std::string answer;
    std::string raw;
};

// Accepts exactly one <think>...</think> block followed by exactly one
// <answer>...</answer> block. Text around the blocks is allowed. Throws
// FormatError naming the first violation found.
TaggedResponse extract_tags(const std::string& text);

bool has_valid_tags(const std::string& text) noexcept;

enum class FilterReason {
    pass,
    model_rejected,
    rule_wrong_answer,
    rule_no_reasoning,
    rule_bad_format,
};

const char* to_string(FilterReason r) noexcept;
FilterStatus status_for(FilterReason r) noexcept;

struct FilterVerdict {
    bool kept = false;
    FilterReason reason = FilterReason::pass;

    static FilterVerdict pass() { return {true, FilterReason::pass}; }
    static FilterVerdict reject(FilterReason r) { return {false, r}; }
};

struct FilterOptions {
    std::size_t min_reasoning_tokens = 20;
    std::string judge_template_path;  // empty: shipped templates/judge.txt
    std::string judge_model_id;
    double judge_temperature = 0.0;
};

// LLM-as-judge pass: keeps the record iff the reply starts with "yes".
FilterVerdict model_filter(const ReasoningSample& rs, const VulnSample& sample, Gateway& gw,
                           const FilterOptions& options = {});

// Rules in order: answer token-equal to the fix, enough reasoning tokens,
// raw reply satisfies the tag grammar. The first broken rule decides.
FilterVerdict rule_filter(const ReasoningSample& rs, const VulnSample& sample,
                          const FilterOptions& options = {});

struct FilterStats {
    std::size_t total = 0;
    std::size_t kept = 0;
    std::size_t model_rejected = 0;
    std::size_t rule_wrong_answer = 0;
    std::size_t rule_no_reasoning = 0;
    std::size_t rule_bad_format = 0;

    void count(FilterReason r);
    nlohmann::ordered_json to_json() const;
    bool operator==(const FilterStats&) const = default;
};

struct FilterResult {
    ReasoningDataset kept;      // tagged d_vul
    ReasoningDataset rejected;
    FilterStats stats;
};

FilterResult filter_dataset(const ReasoningDataset& ds, const VulnDataset& samples, Gateway& gw,
                            const FilterOptions& options = {});

}  // namespace currl
