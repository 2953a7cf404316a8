#include "currl/policy.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "currl/error.hpp"
#include "currl/text.hpp"

namespace currl {

PolicyParams PolicyParams::zeros(std::size_t vocab_size, std::size_t context_order, Token eos) {
    if (vocab_size < 2) throw ArgumentError("policy needs vocab_size >= 2");
    if (context_order < 1) throw ArgumentError("policy needs context_order >= 1");
    PolicyParams p;
    p.vocab_size = vocab_size;
    p.context_order = context_order;
    p.eos = eos;
    p.theta.assign(vocab_size * p.row_size(), 0.0);
    return p;
}

void PolicyParams::validate() const {
    if (theta.size() != vocab_size * row_size())
        throw ArgumentError("theta has " + std::to_string(theta.size()) + " entries, expected " +
                            std::to_string(vocab_size * row_size()));
    for (double v : theta)
        if (!std::isfinite(v)) throw ArgumentError("theta contains a non-finite value");
}

PolicyParams make_policy(const Vocab& vocab, std::size_t context_order) {
    return PolicyParams::zeros(vocab.size(), context_order, vocab.eos());
}

namespace {

void check_token(const PolicyParams& params, Token t) {
    if (t < 0 || static_cast<std::size_t>(t) >= params.vocab_size)
        throw ArgumentError("token id " + std::to_string(t) + " outside vocabulary of size " +
                            std::to_string(params.vocab_size));
}

void logits_into(const PolicyParams& params, std::span<const Token> prefix,
                 std::vector<double>& out) {
    const std::size_t V = params.vocab_size;
    const std::size_t lags = std::min(params.context_order, prefix.size());
    out.resize(V);
    for (std::size_t y = 0; y < V; ++y) {
        double z = params.theta[params.bias_index(static_cast<Token>(y))];
        for (std::size_t j = 1; j <= lags; ++j)
            z += params.theta[params.weight_index(static_cast<Token>(y), j,
                                                  prefix[prefix.size() - j])];
        out[y] = z;
    }
}

// log-softmax in place; returns the log partition function.
double log_softmax(std::vector<double>& z) {
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - m);
    const double lse = m + std::log(s);
    for (double& v : z) v -= lse;
    return lse;
}

}  // namespace

std::vector<double> next_token_logits(const PolicyParams& params, std::span<const Token> prefix) {
    for (Token t : prefix) check_token(params, t);
    std::vector<double> z;
    logits_into(params, prefix, z);
    return z;
}

std::vector<double> next_token_distribution(const PolicyParams& params,
                                            std::span<const Token> prefix, double temperature) {
    if (!(temperature > 0.0)) throw ArgumentError("temperature must be positive");
    auto z = next_token_logits(params, prefix);
    for (double& v : z) v /= temperature;
    log_softmax(z);
    for (double& v : z) v = std::exp(v);
    return z;
}

Trajectory sample_response(const PolicyParams& params, std::span<const Token> prompt,
                           double temperature, std::size_t max_len, Rng& rng) {
    if (!(temperature > 0.0)) throw ArgumentError("temperature must be positive");
    if (max_len < 1) throw ArgumentError("max_len must be at least 1");
    for (Token t : prompt) check_token(params, t);

    Trajectory traj;
    traj.prompt_tokens.assign(prompt.begin(), prompt.end());
    std::vector<Token> seq(prompt.begin(), prompt.end());
    std::vector<double> z, scaled;
    for (std::size_t step = 0; step < max_len; ++step) {
        logits_into(params, seq, z);
        scaled = z;
        if (temperature != 1.0)
            for (double& v : scaled) v /= temperature;
        log_softmax(scaled);
        double u = rng.uniform();
        Token pick = static_cast<Token>(params.vocab_size - 1);
        for (std::size_t y = 0; y < params.vocab_size; ++y) {
            u -= std::exp(scaled[y]);
            if (u < 0.0) {
                pick = static_cast<Token>(y);
                break;
            }
        }
        log_softmax(z);
        traj.response_tokens.push_back(pick);
        traj.logp_current.push_back(z[pick]);
        seq.push_back(pick);
        if (pick == params.eos) break;
    }
    return traj;
}

std::vector<Token> greedy_response(const PolicyParams& params, std::span<const Token> prompt,
                                   std::size_t max_len) {
    for (Token t : prompt) check_token(params, t);
    std::vector<Token> seq(prompt.begin(), prompt.end());
    std::vector<Token> out;
    std::vector<double> z;
    for (std::size_t step = 0; step < max_len; ++step) {
        logits_into(params, seq, z);
        const Token pick = static_cast<Token>(std::max_element(z.begin(), z.end()) - z.begin());
        out.push_back(pick);
        seq.push_back(pick);
        if (pick == params.eos) break;
    }
    return out;
}

std::vector<double> logprobs(const PolicyParams& params, std::span<const Token> prompt,
                             std::span<const Token> response) {
    if (response.empty()) throw ArgumentError("logprobs needs a non-empty response");
    for (Token t : prompt) check_token(params, t);
    for (Token t : response) check_token(params, t);
    std::vector<Token> seq(prompt.begin(), prompt.end());
    seq.insert(seq.end(), response.begin(), response.end());
    std::vector<double> out(response.size());
    std::vector<double> z;
    for (std::size_t t = 0; t < response.size(); ++t) {
        logits_into(params, std::span<const Token>(seq.data(), prompt.size() + t), z);
        log_softmax(z);
        out[t] = z[response[t]];
    }
    return out;
}

double accumulate_logprob_grad(const PolicyParams& params, std::span<const Token> prefix,
                               Token token, double scale, std::span<double> grad) {
    check_token(params, token);
    for (Token t : prefix) check_token(params, t);
    if (grad.size() != params.theta.size()) throw ArgumentError("gradient buffer size mismatch");

    std::vector<double> z;
    logits_into(params, prefix, z);
    log_softmax(z);
    const std::size_t V = params.vocab_size;
    const std::size_t lags = std::min(params.context_order, prefix.size());
    for (std::size_t y = 0; y < V; ++y) {
        // d log p(token) / d logit_y = [y == token] - p_y
        const double g = scale * ((static_cast<Token>(y) == token ? 1.0 : 0.0) - std::exp(z[y]));
        if (g == 0.0) continue;
        grad[params.bias_index(static_cast<Token>(y))] += g;
        for (std::size_t j = 1; j <= lags; ++j)
            grad[params.weight_index(static_cast<Token>(y), j, prefix[prefix.size() - j])] += g;
    }
    return z[token];
}

std::vector<double> token_logprob_grad(const PolicyParams& params, std::span<const Token> prefix,
                                       Token token) {
    std::vector<double> grad(params.theta.size(), 0.0);
    accumulate_logprob_grad(params, prefix, token, 1.0, grad);
    return grad;
}

std::string checkpoint_json(const PolicyParams& params) {
    params.validate();
    nlohmann::ordered_json j;
    j["format"] = "currl-policy";
    j["version"] = 1;
    j["vocab_size"] = params.vocab_size;
    j["context_order"] = params.context_order;
    j["eos"] = params.eos;
    j["theta"] = params.theta;
    return j.dump() + "\n";
}

PolicyParams checkpoint_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.at("format") != "currl-policy") throw ParseError(0, "not a currl policy checkpoint");
        if (j.at("version") != 1) throw ParseError(0, "unsupported checkpoint version");
        PolicyParams p;
        p.vocab_size = j.at("vocab_size").get<std::size_t>();
        p.context_order = j.at("context_order").get<std::size_t>();
        p.eos = j.at("eos").get<Token>();
        p.theta = j.at("theta").get<std::vector<double>>();
        p.validate();
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, std::string("bad checkpoint: ") + e.what());
    }
}

void save_checkpoint(const PolicyParams& params, const std::string& path) {
    write_file(path, checkpoint_json(params));
}

PolicyParams load_checkpoint(const std::string& path) {
    return checkpoint_from_json(read_file(path));
}

}  // namespace currl
