#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "currl/rng.hpp"
#include "currl/vocab.hpp"

namespace currl {

// Linear-softmax next-token model over the one-hot identities of the last
// `context_order` tokens. For each output token y the parameter row is
//   [ W_1[y][0..V) | W_2[y][0..V) | ... | W_k[y][0..V) | b[y] ]
// where W_j scores the token j positions back. Positions before the start of
// the sequence contribute nothing.
struct PolicyParams {
    std::size_t vocab_size = 0;
    std::size_t context_order = 2;
    std::vector<double> theta;
    Token eos = -1;  // sampling stops after emitting it; -1 disables

    static PolicyParams zeros(std::size_t vocab_size, std::size_t context_order, Token eos = -1);

    std::size_t row_size() const noexcept { return context_order * vocab_size + 1; }
    std::size_t weight_index(Token out, std::size_t lag, Token in) const noexcept {
        return static_cast<std::size_t>(out) * row_size() + (lag - 1) * vocab_size +
               static_cast<std::size_t>(in);
    }
    std::size_t bias_index(Token out) const noexcept {
        return static_cast<std::size_t>(out) * row_size() + context_order * vocab_size;
    }

    // Throws ArgumentError on a length mismatch or non-finite entries.
    void validate() const;
};

PolicyParams make_policy(const Vocab& vocab, std::size_t context_order);

// One sampled response with its per-token bookkeeping.
struct Trajectory {
    std::vector<Token> prompt_tokens;
    std::vector<Token> response_tokens;
    std::vector<double> logp_current;  // at sampling time
    std::vector<double> logp_old;
    std::vector<double> logp_ref;
    std::vector<double> kl_terms;
    double terminal_reward = 0.0;

    std::size_t length() const noexcept { return response_tokens.size(); }
};

std::vector<double> next_token_logits(const PolicyParams& params, std::span<const Token> prefix);

std::vector<double> next_token_distribution(const PolicyParams& params,
                                            std::span<const Token> prefix,
                                            double temperature = 1.0);

// Samples until EOS or max_len tokens. Tokens are drawn at `temperature`;
// logp_current records log pi_theta (temperature 1) of each drawn token so it
// agrees with logprobs() on the same sequence.
Trajectory sample_response(const PolicyParams& params, std::span<const Token> prompt,
                           double temperature, std::size_t max_len, Rng& rng);

std::vector<Token> greedy_response(const PolicyParams& params, std::span<const Token> prompt,
                                   std::size_t max_len);

// Teacher-forced log-probabilities of `response` after `prompt`.
std::vector<double> logprobs(const PolicyParams& params, std::span<const Token> prompt,
                             std::span<const Token> response);

// d/dtheta log pi(token | prefix), dense.
std::vector<double> token_logprob_grad(const PolicyParams& params, std::span<const Token> prefix,
                                       Token token);

// Adds scale * d/dtheta log pi(token | prefix) into `grad` (touching only the
// active columns) and returns log pi(token | prefix).
double accumulate_logprob_grad(const PolicyParams& params, std::span<const Token> prefix,
                               Token token, double scale, std::span<double> grad);

void save_checkpoint(const PolicyParams& params, const std::string& path);
PolicyParams load_checkpoint(const std::string& path);
std::string checkpoint_json(const PolicyParams& params);
PolicyParams checkpoint_from_json(const std::string& text);

}  // namespace currl
