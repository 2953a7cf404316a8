#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "currl/corpus.hpp"
#include "currl/policy.hpp"

namespace currl {

// One training sequence. Position t predicts labels[t] from tokens[0..t);
// only positions with loss_mask set contribute, so prompt positions never do.
struct SftItem {
    std::vector<Token> tokens;
    std::vector<Token> labels;
    std::vector<bool> loss_mask;

    static SftItem from_prompt_target(const std::vector<Token>& prompt,
                                      const std::vector<Token>& target);
    std::size_t target_count() const;
};

struct SftBatch {
    std::vector<SftItem> items;
};

struct SftLossValue {
    double loss = 0.0;
    std::vector<double> gradient;  // of the loss (descent direction is its negative)
};

// Mean over items of -sum log pi(target token | preceding tokens).
SftLossValue sft_loss(const PolicyParams& params, const SftBatch& batch);

struct SftConfig {
    std::size_t epochs = 100;
    double learning_rate = 0.5;
    std::size_t batch_size = 16;
    std::uint64_t seed = 0;
};

struct SftEpoch {
    std::size_t epoch = 0;
    double mean_loss = 0.0;
};

using SftLog = std::vector<SftEpoch>;

// Mini-batch gradient descent with a constant rate. Each log entry is the mean
// of the batch losses seen during that epoch.
std::pair<PolicyParams, SftLog> sft_train(const PolicyParams& params,
                                          const std::vector<SftItem>& items,
                                          const SftConfig& cfg);

// Prompt tokens the toy policy sees for an open-ended task: BOS, the context,
// then the code, so the code sits next to the response.
std::vector<Token> encode_task_prompt(const Vocab& vocab, const VulnSample& sample);

// <think> c </think> <answer> y </answer> EOS
std::vector<Token> encode_tagged_target(const Vocab& vocab, const std::string& think,
                                        const std::string& answer);

// Joins reasoning records with their samples. Throws IntegrityError on a
// dangling sample_id and ArgumentError when a record lacks reasoning or answer.
std::vector<SftItem> build_sft_items(const ReasoningDataset& records,
                                     const std::map<std::string, VulnSample>& samples,
                                     const Vocab& vocab);

}  // namespace currl
