#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "currl/corpus.hpp"
#include "currl/policy.hpp"
#include "currl/vocab.hpp"

namespace currl {

// True iff the whitespace-normalized token sequences are identical.
bool exact_match(const std::string& prediction, const std::string& truth);

struct SampleScore {
    std::string id;
    bool exact = false;
    double sim = 0.0;
};

struct EvalReport {
    std::size_t total = 0;
    std::size_t success = 0;
    double em_percent = 0.0;
    double mean_sim = 0.0;
    std::vector<SampleScore> per_sample;  // dataset order

    nlohmann::ordered_json to_json() const;
    std::string to_table() const;
};

// Scores predictions against every sample of `ds`. Missing predictions count
// as failures with Sim 0; a prediction for an unknown id is an IntegrityError.
EvalReport evaluate(const std::map<std::string, std::string>& predictions, const VulnDataset& ds);

// Greedy decode of each sample's open-ended prompt. The prediction is the
// answer block when the tags parse, otherwise the empty string.
std::map<std::string, std::string> greedy_predictions(const PolicyParams& params,
                                                      const VulnDataset& ds, const Vocab& vocab,
                                                      std::size_t max_prompt_len,
                                                      std::size_t max_response_len);

}  // namespace currl
