#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "currl/curriculum.hpp"
#include "currl/filter.hpp"
#include "currl/gateway.hpp"
#include "currl/rac.hpp"
#include "currl/reward.hpp"
#include "currl/sft.hpp"

namespace currl {

struct PathsConfig {
    std::string tasks;           // VulnSample JSONL used for RL and evaluation
    std::string sft_samples;     // VulnSample JSONL fed to reasoning construction; empty: tasks
    std::string code_samples;    // prompts of the algorithmic reasoning set (optional)
    std::string code_reasoning;  // its reasoning records (optional)
    std::string checkpoint;      // starting policy for stages run without their predecessor
    std::string run_dir = "runs/default";
};

struct PolicyConfig {
    std::size_t content_vocab = 16;
    std::size_t context_order = 2;
};

struct EvalConfig {
    std::string split = "test";
    std::size_t max_response_len = 4096;
};

// Shape of the synthetic corpora written by `toygen`.
struct ToyConfig {
    std::size_t tasks = 64;
    std::size_t seq_len = 6;
    std::size_t code_items = 64;
    // Successor-cycle swaps separating the warm-start domain from the task
    // domain; 0 makes them share transitions.
    std::size_t domain_swaps = 1;
};

struct RunConfig {
    std::uint64_t seed = 0;
    PathsConfig paths;
    GatewayConfig gateway;
    RacOptions rac;
    FilterOptions filter;
    CriticBackend critic_backend = CriticBackend::llm;
    LlmCriticOptions critic;
    PolicyConfig policy;
    SftConfig sft;
    StageConfig easy = StageConfig::easy_defaults();
    StageConfig hard = StageConfig::hard_defaults();
    EvalConfig eval;
    ToyConfig toy;

    // Published hyperparameters for the large-model setting.
    static RunConfig defaults();
    // Desk-scale profile for the synthetic corpus and the n-gram policy.
    static RunConfig toy_profile();

    nlohmann::ordered_json to_json() const;
    // Overlays the keys present in `j` on `base`; unknown keys are ConfigErrors.
    static RunConfig from_json(const nlohmann::json& j, RunConfig base = defaults());
    static RunConfig load(const std::string& path);
    void save(const std::string& path) const;

    void validate() const;
};

}  // namespace currl
