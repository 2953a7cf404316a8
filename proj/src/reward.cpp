#include "currl/reward.hpp"

#include <algorithm>

#include "currl/error.hpp"
#include "currl/filter.hpp"
#include "currl/templates.hpp"
#include "currl/text.hpp"

namespace currl {

double similarity(std::span<const std::string> a, std::span<const std::string> b) {
    if (a.empty() && b.empty()) return 1.0;
    if (a.empty() || b.empty()) return 0.0;
    // Two-row LCS table.
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    const double lcs = static_cast<double>(prev[b.size()]);
    return 2.0 * lcs / static_cast<double>(a.size() + b.size());
}

double similarity(const std::string& candidate, const std::string& truth) {
    const auto a = normalize_tokens(candidate);
    const auto b = normalize_tokens(truth);
    return similarity(std::span<const std::string>(a), std::span<const std::string>(b));
}

double format_reward(const std::string& raw) { return has_valid_tags(raw) ? 1.0 : -1.0; }

double accuracy_reward(int critic, double sim) { return critic == 0 ? -2.0 : 1.0 + sim; }

const char* to_string(CriticBackend b) noexcept {
    return b == CriticBackend::llm ? "llm" : "oracle";
}

CriticBackend parse_critic_backend(const std::string& s) {
    if (s == "llm") return CriticBackend::llm;
    if (s == "oracle") return CriticBackend::oracle;
    throw ConfigError("unknown critic backend: " + s);
}

int OracleCritic::judge(const std::string& answer, const VulnSample& sample) {
    return token_equal(answer, sample.ground_truth_fix) ? 1 : 0;
}

int parse_critic_reply(const std::string& reply) {
    const std::string r = to_lower(trim(reply));
    if (starts_with(r, "1") || starts_with(r, "yes")) return 1;
    if (starts_with(r, "0") || starts_with(r, "no")) return 0;
    throw ProtocolError("critic reply is not a verdict: \"" + r + "\"");
}

LlmCritic::LlmCritic(Gateway& gw, LlmCriticOptions options)
    : gw_(gw), options_(std::move(options)) {
    template_ = load_template(options_.template_path.empty() ? default_template_path("critic.txt")
                                                            : options_.template_path);
}

int LlmCritic::judge(const std::string& answer, const VulnSample& sample) {
    ChatRequest req;
    req.model_id = options_.model_id;
    req.temperature = options_.temperature;
    req.max_tokens = 8;
    req.messages.push_back({Role::user, render_template(template_,
                                                        {{"cwe_id", sample.cwe_id},
                                                         {"description", sample.description},
                                                         {"vulnerable_code", sample.vulnerable_code},
                                                         {"answer", answer}})});
    return parse_critic_reply(gw_.complete(req).content);
}

std::unique_ptr<Critic> make_critic(CriticBackend backend, Gateway* gw,
                                    const LlmCriticOptions& options) {
    if (backend == CriticBackend::oracle) return std::make_unique<OracleCritic>();
    if (!gw) throw ConfigError("llm critic needs a gateway");
    return std::make_unique<LlmCritic>(*gw, options);
}

RewardBreakdown total_reward(const std::string& raw, const VulnSample& sample, Critic& critic) {
    RewardBreakdown r;
    TaggedResponse tagged;
    try {
        tagged = extract_tags(raw);
    } catch (const FormatError&) {
        return r;  // format -1, no answer to judge: acc -2
    }
    r.format = 1.0;
    r.critic = critic.judge(tagged.answer, sample);
    r.sim = similarity(tagged.answer, sample.ground_truth_fix);
    r.acc = accuracy_reward(r.critic, r.sim);
    r.total = r.acc + r.format;
    return r;
}

}  // namespace currl
