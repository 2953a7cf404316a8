#include "currl/rlcore.hpp"

#include <algorithm>
#include <cmath>

#include "currl/error.hpp"

namespace currl {

void RlConfig::validate() const {
    if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0))
        throw ConfigError("clip_epsilon must lie in (0, 1)");
    if (!(kl_beta >= 0.0)) throw ConfigError("kl_beta must be >= 0");
    if (rollouts_per_prompt < 2) throw ConfigError("rollouts_per_prompt must be >= 2");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
    if (max_response_len < 1) throw ConfigError("max_response_len must be >= 1");
    if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
}

double kl_term(double logp_cur, double logp_ref) {
    const double log_ratio = logp_ref - logp_cur;
    // expm1 keeps rho - 1 - ln(rho) accurate when rho is close to 1.
    return std::max(0.0, std::expm1(log_ratio) - log_ratio);
}

std::vector<double> shaped_rewards(const RolloutGroup& group, const RlConfig& cfg) {
    std::vector<double> out;
    out.reserve(group.trajectories.size());
    for (const auto& traj : group.trajectories) {
        double r = traj.terminal_reward;
        if (cfg.kl_in_reward) {
            if (traj.kl_terms.size() != traj.length())
                throw StateError("trajectory is missing its KL terms");
            double kl = 0.0;
            for (double v : traj.kl_terms) kl += v;
            r -= cfg.kl_beta * kl;
        }
        out.push_back(r);
    }
    return out;
}

namespace {

std::pair<double, double> mean_and_pop_std(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size());
    return {mean, std::sqrt(var)};
}

}  // namespace

std::vector<double> group_advantages(const std::vector<double>& shaped, double std_floor) {
    if (shaped.size() < 2) throw ArgumentError("advantage normalization needs at least 2 rewards");
    const auto [mean, sd] = mean_and_pop_std(shaped);
    std::vector<double> out(shaped.size(), 0.0);
    if (!(sd >= std_floor) || sd == 0.0) return out;
    for (std::size_t i = 0; i < shaped.size(); ++i) out[i] = (shaped[i] - mean) / sd;
    return out;
}

void compute_advantages(RolloutGroup& group, const RlConfig& cfg) {
    group.shaped_rewards = shaped_rewards(group, cfg);
    group.advantages.assign(group.trajectories.size(), {});

    if (!cfg.kl_tail_sum) {
        const auto adv = group_advantages(group.shaped_rewards, cfg.std_floor);
        for (std::size_t i = 0; i < adv.size(); ++i)
            group.advantages[i].assign(group.trajectories[i].length(), adv[i]);
        return;
    }

    // Tail-sum reading: token t sees terminal - beta * sum_{s >= t} KL_s,
    // normalized over every token of the group.
    std::vector<double> flat;
    for (std::size_t i = 0; i < group.trajectories.size(); ++i) {
        const auto& traj = group.trajectories[i];
        if (traj.kl_terms.size() != traj.length())
            throw StateError("trajectory is missing its KL terms");
        auto& row = group.advantages[i];
        row.resize(traj.length());
        double tail = 0.0;
        for (std::size_t t = traj.length(); t-- > 0;) {
            tail += traj.kl_terms[t];
            row[t] = traj.terminal_reward - (cfg.kl_in_reward ? cfg.kl_beta * tail : 0.0);
        }
        flat.insert(flat.end(), row.begin(), row.end());
    }
    if (flat.size() < 2) {
        for (auto& row : group.advantages) std::fill(row.begin(), row.end(), 0.0);
        return;
    }
    const auto [mean, sd] = mean_and_pop_std(flat);
    for (auto& row : group.advantages)
        for (double& a : row) a = (sd >= cfg.std_floor && sd > 0.0) ? (a - mean) / sd : 0.0;
}

ObjectiveValue surrogate_loss(const RolloutGroup& group, const PolicyParams& params,
                              const RlConfig& cfg) {
    if (group.trajectories.empty()) throw ArgumentError("empty rollout group");
    if (group.advantages.size() != group.trajectories.size())
        throw StateError("advantages have not been computed for group " + group.prompt_id);

    ObjectiveValue out;
    out.gradient.assign(params.theta.size(), 0.0);
    const double eps = cfg.clip_epsilon;
    const double n = static_cast<double>(group.trajectories.size());

    for (std::size_t i = 0; i < group.trajectories.size(); ++i) {
        const auto& traj = group.trajectories[i];
        const std::size_t T = traj.length();
        if (T == 0) continue;
        if (traj.logp_old.size() != T) throw StateError("trajectory lacks the pi_old snapshot");
        if (cfg.kl_in_loss && traj.logp_ref.size() != T)
            throw StateError("trajectory lacks the pi_ref snapshot");
        if (group.advantages[i].size() != T) throw StateError("advantage row length mismatch");

        std::vector<Token> seq = traj.prompt_tokens;
        seq.insert(seq.end(), traj.response_tokens.begin(), traj.response_tokens.end());
        const auto cur = logprobs(params, traj.prompt_tokens, traj.response_tokens);
        const double weight = 1.0 / (n * static_cast<double>(T));

        for (std::size_t t = 0; t < T; ++t) {
            const double adv = group.advantages[i][t];
            const double ratio = std::exp(cur[t] - traj.logp_old[t]);
            const double unclipped = ratio * adv;
            const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * adv;
            double value, coeff;
            if (unclipped <= clipped) {
                value = unclipped;
                coeff = ratio * adv;  // d(ratio)/d(theta) = ratio * grad log pi
            } else {
                value = clipped;
                coeff = 0.0;
            }
            if (cfg.kl_in_loss) {
                value -= cfg.kl_beta * kl_term(cur[t], traj.logp_ref[t]);
                // d KL / d log pi_theta = 1 - pi_ref / pi_theta
                coeff -= cfg.kl_beta * (1.0 - std::exp(traj.logp_ref[t] - cur[t]));
            }
            out.objective += weight * value;
            if (coeff != 0.0)
                accumulate_logprob_grad(params,
                                        std::span<const Token>(seq.data(), traj.prompt_tokens.size() + t),
                                        traj.response_tokens[t], weight * coeff, out.gradient);
        }
    }
    return out;
}

ObjectiveValue batch_objective(const std::vector<RolloutGroup>& groups, const PolicyParams& params,
                               const RlConfig& cfg) {
    if (groups.empty()) throw ArgumentError("empty rollout batch");
    ObjectiveValue total;
    total.gradient.assign(params.theta.size(), 0.0);
    for (const auto& g : groups) {
        const auto v = surrogate_loss(g, params, cfg);
        total.objective += v.objective;
        for (std::size_t k = 0; k < v.gradient.size(); ++k) total.gradient[k] += v.gradient[k];
    }
    const double inv = 1.0 / static_cast<double>(groups.size());
    total.objective *= inv;
    for (double& g : total.gradient) g *= inv;
    return total;
}

StepStats batch_stats(const std::vector<RolloutGroup>& groups) {
    StepStats s;
    std::size_t trajs = 0, tokens = 0, scored = 0, valid = 0;
    for (const auto& g : groups) {
        for (std::size_t i = 0; i < g.trajectories.size(); ++i) {
            const auto& traj = g.trajectories[i];
            ++trajs;
            s.mean_terminal_reward += traj.terminal_reward;
            if (i < g.shaped_rewards.size()) s.mean_shaped_reward += g.shaped_rewards[i];
            s.mean_response_length += static_cast<double>(traj.length());
            for (double v : traj.kl_terms) s.mean_kl += v;
            tokens += traj.kl_terms.size();
        }
        for (const auto& r : g.rewards) {
            ++scored;
            if (r.format_valid()) ++valid;
        }
    }
    if (trajs) {
        s.mean_terminal_reward /= static_cast<double>(trajs);
        s.mean_shaped_reward /= static_cast<double>(trajs);
        s.mean_response_length /= static_cast<double>(trajs);
    }
    if (tokens) s.mean_kl /= static_cast<double>(tokens);
    if (scored) s.format_valid_rate = static_cast<double>(valid) / static_cast<double>(scored);
    return s;
}

std::pair<PolicyParams, StepStats> policy_update(const PolicyParams& params,
                                                 const std::vector<RolloutGroup>& groups,
                                                 const RlConfig& cfg) {
    if (groups.empty()) throw ArgumentError("policy_update needs a non-empty batch");
    const auto value = batch_objective(groups, params, cfg);
    double norm2 = 0.0;
    for (double g : value.gradient) {
        if (!std::isfinite(g)) throw NumericError("non-finite policy gradient; step rejected");
        norm2 += g * g;
    }
    if (!std::isfinite(value.objective)) throw NumericError("non-finite objective; step rejected");

    PolicyParams next = params;
    if (cfg.learning_rate != 0.0)
        for (std::size_t k = 0; k < next.theta.size(); ++k)
            next.theta[k] += cfg.learning_rate * value.gradient[k];

    StepStats stats = batch_stats(groups);
    stats.objective = value.objective;
    stats.grad_norm = std::sqrt(norm2);
    return {std::move(next), stats};
}

void annotate_trajectory(Trajectory& traj, const PolicyParams& ref) {
    traj.logp_old = traj.logp_current;
    if (traj.response_tokens.empty()) {
        traj.logp_ref.clear();
        traj.kl_terms.clear();
        return;
    }
    traj.logp_ref = logprobs(ref, traj.prompt_tokens, traj.response_tokens);
    traj.kl_terms.resize(traj.length());
    for (std::size_t t = 0; t < traj.length(); ++t)
        traj.kl_terms[t] = kl_term(traj.logp_current[t], traj.logp_ref[t]);
}

}  // namespace currl
