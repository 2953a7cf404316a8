#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "currl/corpus.hpp"
#include "currl/policy.hpp"
#include "currl/reward.hpp"
#include "currl/rlcore.hpp"
#include "currl/training_log.hpp"
#include "currl/vocab.hpp"

namespace currl {

enum class Stage { easy, hard };

const char* to_string(Stage s) noexcept;
Stage parse_stage(const std::string& s);

// Multiple-choice reformulation of one repair task.
struct McqPrompt {
    std::string sample_id;
    std::string stem;
    std::array<std::string, 4> options;
    char correct_letter = 'A';
    std::uint64_t seed = 0;
};

struct StageConfig {
    Stage stage = Stage::easy;
    std::size_t steps = 125;
    RlConfig rl;
    std::size_t distractor_budget = 3;  // J
    std::size_t distractor_attempts = 8;
    std::string mcq_template_path;  // empty: shipped templates/mcq.txt
    std::size_t workers = 0;        // 0: hardware concurrency
    // Easy stage: also ask the critic about the emitted code, not just the letter.
    bool mcq_code_critic = false;

    static StageConfig easy_defaults();  // 8 rollouts per prompt
    static StageConfig hard_defaults();  // 16 rollouts per prompt
    void validate() const;
};

// Policy-first distractor collection: samples up to `attempts` answers to the
// open-ended prompt, keeping tag-valid ones that differ from the ground truth
// and from each other, then tops up from the answers of other pool records.
// Throws ConstructionError when fewer than j distinct distractors exist.
std::vector<std::string> collect_distractors(const VulnSample& sample, const PolicyParams& params,
                                             const Vocab& vocab, const ReasoningDataset& pool,
                                             std::size_t j, std::size_t attempts,
                                             const RlConfig& sampling, Rng& rng);

// Shuffles the ground truth among three distractors. Throws ArgumentError
// on a wrong distractor count or token-identical options.
McqPrompt build_multiple_choice(const VulnSample& sample, const std::vector<std::string>& distractors,
                                std::uint64_t seed, const std::string& template_text);
McqPrompt build_multiple_choice(const VulnSample& sample, const std::vector<std::string>& distractors,
                                std::uint64_t seed);

// First standalone A-D token of the response, ignoring tag markers.
std::optional<char> extract_letter(const std::string& raw);

// Easy-stage reward: the critic outcome is the letter match (and, when
// `code_critic` is given, its verdict on the emitted code). Sim compares the
// code in the answer, minus a leading letter, with the ground truth.
RewardBreakdown grade_mcq(const std::string& raw, const McqPrompt& prompt, const VulnSample& sample,
                          Critic* code_critic = nullptr);

// Policy-side token encodings of the two prompt kinds. The multiple-choice
// prompt inserts the four lettered options between the context and the code.
std::vector<Token> encode_hard_prompt(const Vocab& vocab, const VulnSample& sample,
                                      std::size_t max_len);
std::vector<Token> encode_mcq_prompt(const Vocab& vocab, const VulnSample& sample,
                                     const McqPrompt& mcq, std::size_t max_len);

struct StageResult {
    PolicyParams params;
    TrainingLog log;
    std::vector<McqPrompt> mcqs;  // easy stage only
};

// Trains one curriculum stage. Each step draws batch_size prompts uniformly
// (with replacement) from `tasks`, samples rollouts_per_prompt responses per
// prompt, scores, normalizes and takes one update. The reference policy is
// the entry parameters. Log steps continue from `step_offset`.
// The easy stage builds its multiple-choice prompts once at entry, drawing
// distractors from the entry policy and `pool`.
StageResult run_stage(const PolicyParams& params, const VulnDataset& tasks, const StageConfig& cfg,
                      Critic& critic, const Vocab& vocab, std::uint64_t seed,
                      const ReasoningDataset* pool = nullptr, std::size_t step_offset = 0);

}  // namespace currl
