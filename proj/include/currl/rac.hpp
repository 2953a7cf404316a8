#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "currl/corpus.hpp"
#include "currl/gateway.hpp"

namespace currl {

// The three-part reasoning prompt: domain-knowledge instructions, repair-step
// guidance, and the output specification carrying the reference answer.
struct RacPrompt {
    std::string instructions;
    std::string guidance;
    std::string specification;
    std::string rendered;
};

struct RacOptions {
    std::string template_path;  // empty: shipped templates/rac.txt
    std::string model_id;
    double temperature = 0.7;
    std::size_t max_tokens = 4096;
    std::size_t attempts = 3;
};

RacPrompt build_rac_prompt(const VulnSample& sample, const std::string& template_path = {});

// Asks the generator for a tagged reasoning answer, retrying on tag-parse
// failures. Throws GenerationError with the last raw reply when every attempt
// fails.
ReasoningSample generate_reasoning(const VulnSample& sample, Gateway& gw,
                                   const RacOptions& options = {});

struct RacBatchResult {
    ReasoningDataset generated;
    std::vector<std::pair<std::string, std::string>> failures;  // (sample id, error)
};

// Processes samples concurrently under the gateway's parallelism limit.
RacBatchResult generate_reasoning_batch(const VulnDataset& samples, Gateway& gw,
                                        const RacOptions& options = {});

}  // namespace currl
