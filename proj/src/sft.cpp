#include "currl/sft.hpp"

#include <numeric>

#include "currl/error.hpp"
#include "currl/rng.hpp"

namespace currl {

SftItem SftItem::from_prompt_target(const std::vector<Token>& prompt,
                                    const std::vector<Token>& target) {
    SftItem item;
    item.tokens = prompt;
    item.tokens.insert(item.tokens.end(), target.begin(), target.end());
    item.labels = item.tokens;
    item.loss_mask.assign(prompt.size(), false);
    item.loss_mask.resize(item.tokens.size(), true);
    return item;
}

std::size_t SftItem::target_count() const {
    return static_cast<std::size_t>(std::count(loss_mask.begin(), loss_mask.end(), true));
}

SftLossValue sft_loss(const PolicyParams& params, const SftBatch& batch) {
    if (batch.items.empty()) throw ArgumentError("sft_loss needs a non-empty batch");
    SftLossValue out;
    out.gradient.assign(params.theta.size(), 0.0);
    const double inv = 1.0 / static_cast<double>(batch.items.size());
    for (const auto& item : batch.items) {
        if (item.labels.size() != item.tokens.size() || item.loss_mask.size() != item.tokens.size())
            throw ArgumentError("sft item arrays differ in length");
        if (item.target_count() == 0) throw ArgumentError("sft item has an empty target");
        for (std::size_t t = 0; t < item.tokens.size(); ++t) {
            if (!item.loss_mask[t]) continue;
            // Gradient of -log pi is minus the log-prob gradient.
            const double lp = accumulate_logprob_grad(
                params, std::span<const Token>(item.tokens.data(), t), item.labels[t], -inv,
                out.gradient);
            out.loss -= inv * lp;
        }
    }
    return out;
}

std::pair<PolicyParams, SftLog> sft_train(const PolicyParams& params,
                                          const std::vector<SftItem>& items,
                                          const SftConfig& cfg) {
    if (cfg.batch_size < 1) throw ConfigError("sft batch_size must be >= 1");
    PolicyParams cur = params;
    SftLog log;
    if (cfg.epochs == 0) return {cur, log};
    if (items.empty()) throw ArgumentError("sft_train needs training items");

    std::vector<std::size_t> order(items.size());
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng = Rng::derive(cfg.seed, 0x5f7, epoch);
        rng.shuffle(std::span<std::size_t>(order));

        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            SftBatch batch;
            for (std::size_t k = start; k < std::min(order.size(), start + cfg.batch_size); ++k)
                batch.items.push_back(items[order[k]]);
            const auto value = sft_loss(cur, batch);
            for (std::size_t k = 0; k < cur.theta.size(); ++k)
                cur.theta[k] -= cfg.learning_rate * value.gradient[k];
            loss_sum += value.loss;
            ++batches;
        }
        log.push_back({epoch + 1, loss_sum / static_cast<double>(batches)});
    }
    return {cur, log};
}

std::vector<Token> encode_task_prompt(const Vocab& vocab, const VulnSample& sample) {
    std::vector<Token> out{vocab.bos()};
    for (Token t : vocab.tokenize(sample.context)) out.push_back(t);
    for (Token t : vocab.tokenize(sample.vulnerable_code)) out.push_back(t);
    return out;
}

std::vector<Token> encode_tagged_target(const Vocab& vocab, const std::string& think,
                                        const std::string& answer) {
    std::vector<Token> out{vocab.think_open()};
    for (Token t : vocab.tokenize(think)) out.push_back(t);
    out.push_back(vocab.think_close());
    out.push_back(vocab.answer_open());
    for (Token t : vocab.tokenize(answer)) out.push_back(t);
    out.push_back(vocab.answer_close());
    out.push_back(vocab.eos());
    return out;
}

std::vector<SftItem> build_sft_items(const ReasoningDataset& records,
                                     const std::map<std::string, VulnSample>& samples,
                                     const Vocab& vocab) {
    std::vector<SftItem> out;
    out.reserve(records.size());
    for (const auto& rs : records.records) {
        auto it = samples.find(rs.sample_id);
        if (it == samples.end())
            throw IntegrityError("reasoning record references unknown sample \"" + rs.sample_id +
                                 "\"");
        if (rs.think.empty() || rs.answer.empty())
            throw ArgumentError("record " + rs.sample_id + " lacks reasoning or answer");
        out.push_back(SftItem::from_prompt_target(encode_task_prompt(vocab, it->second),
                                                  encode_tagged_target(vocab, rs.think, rs.answer)));
    }
    return out;
}

}  // namespace currl
