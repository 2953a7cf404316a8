#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "currl/corpus.hpp"
#include "currl/gateway.hpp"

namespace currl {

// Per-response reward decomposition. acc is -2 when the critic rejects and
// 1 + sim otherwise; total = acc + format.
struct RewardBreakdown {
    double format = -1.0;
    int critic = 0;
    double sim = 0.0;
    double acc = -2.0;
    double total = -3.0;

    bool format_valid() const noexcept { return format > 0.0; }
    bool operator==(const RewardBreakdown&) const = default;
};

// 2 * LCS / (m + n) over token sequences; 1 when both are empty.
double similarity(std::span<const std::string> candidate, std::span<const std::string> truth);
double similarity(const std::string& candidate, const std::string& truth);

double format_reward(const std::string& raw);

// Combines a critic verdict and similarity into the accuracy reward.
double accuracy_reward(int critic, double sim);

enum class CriticBackend { llm, oracle };

const char* to_string(CriticBackend b) noexcept;
CriticBackend parse_critic_backend(const std::string& s);

class Critic {
public:
    virtual ~Critic() = default;
    // 1 if `answer` repairs `sample`, 0 otherwise.
    virtual int judge(const std::string& answer, const VulnSample& sample) = 0;
};

// Deterministic stand-in: accepts exactly the token-equal ground truth.
class OracleCritic : public Critic {
public:
    int judge(const std::string& answer, const VulnSample& sample) override;
};

struct LlmCriticOptions {
    std::string template_path;  // empty: shipped templates/critic.txt
    std::string model_id;
    double temperature = 0.0;
};

// Asks a critic model through the gateway. Replies starting with "1"/"yes"
// score 1, "0"/"no" score 0, anything else is a ProtocolError.
class LlmCritic : public Critic {
public:
    LlmCritic(Gateway& gw, LlmCriticOptions options = {});
    int judge(const std::string& answer, const VulnSample& sample) override;

private:
    Gateway& gw_;
    LlmCriticOptions options_;
    std::string template_;
};

int parse_critic_reply(const std::string& reply);

std::unique_ptr<Critic> make_critic(CriticBackend backend, Gateway* gw,
                                    const LlmCriticOptions& options = {});

// Scores one raw response. Untagged responses never reach the critic.
RewardBreakdown total_reward(const std::string& raw, const VulnSample& sample, Critic& critic);

}  // namespace currl
