#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "currl/error.hpp"
#include "currl/policy.hpp"
#include "support.hpp"

using namespace currl;

TEST_CASE("zero weights give a uniform policy", "[policy]") {
    Vocab v(4);
    const auto p = make_policy(v, 2);
    const std::vector<Token> prompt{v.bos(), 1};
    const std::vector<Token> resp{0, 3, 2};
    for (double lp : logprobs(p, prompt, resp)) CHECK(lp == Catch::Approx(-std::log(double(v.size()))));
    auto z = PolicyParams::zeros(4, 1);
    const std::vector<Token> none;
    CHECK(logprobs(z, none, std::vector<Token>{2})[0] == Catch::Approx(std::log(0.25)));
}

TEST_CASE("hand-built two-token softmax", "[policy]") {
    auto p = PolicyParams::zeros(2, 1);
    p.theta[p.bias_index(1)] = 2.0;
    const std::vector<Token> none;
    CHECK(logprobs(p, none, std::vector<Token>{1})[0] == Catch::Approx(-std::log1p(std::exp(-2.0))).epsilon(1e-12));
    const auto g = token_logprob_grad(PolicyParams::zeros(2, 1), none, 0);
    CHECK(g[PolicyParams::zeros(2, 1).bias_index(0)] == Catch::Approx(0.5));
}

TEST_CASE("distributions normalize", "[policy]") {
    Vocab v(6);
    Rng rng(3);
    const auto p = testing::random_policy(v, 3, rng, 2.0);
    for (int i = 0; i < 20; ++i) {
        const auto prefix = testing::random_tokens(rng.below(6), v.size(), rng);
        const auto d = next_token_distribution(p, prefix);
        CHECK(std::accumulate(d.begin(), d.end(), 0.0) == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("log-prob gradient matches finite differences", "[policy]") {
    Vocab v(4);
    Rng rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        const auto p = testing::random_policy(v, 2, rng);
        const auto prefix = testing::random_tokens(1 + rng.below(4), v.size(), rng);
        const Token tok = static_cast<Token>(rng.below(v.size()));
        const auto analytic = token_logprob_grad(p, prefix, tok);
        const auto numeric = testing::numeric_gradient(
            [&](const PolicyParams& q) { return logprobs(q, prefix, std::vector<Token>{tok})[0]; }, p, 1e-5);
        CHECK(testing::max_relative_error(analytic, numeric) < 1e-6);
    }
}

TEST_CASE("score function has zero mean", "[policy]") {
    Rng rng(2);
    auto p = PolicyParams::zeros(3, 1);
    for (auto& w : p.theta) w = rng.uniform() - 0.5;
    const std::vector<Token> prefix{1};
    const auto d = next_token_distribution(p, prefix);
    std::vector<double> mean(p.theta.size(), 0.0);
    for (Token t = 0; t < 3; ++t) {
        const auto g = token_logprob_grad(p, prefix, t);
        for (std::size_t i = 0; i < g.size(); ++i) mean[i] += d[t] * g[i];
    }
    for (double m : mean) CHECK(std::abs(m) < 1e-12);
}

TEST_CASE("sampling is seeded and bounded", "[policy]") {
    Vocab v(8);
    Rng init(4);
    const auto p = testing::random_policy(v, 2, init);
    const std::vector<Token> prompt{v.bos()};
    Rng a(9), b(9);
    const auto ta = sample_response(p, prompt, 1.0, 30, a);
    const auto tb = sample_response(p, prompt, 1.0, 30, b);
    CHECK(ta.response_tokens == tb.response_tokens);
    const auto lp = logprobs(p, prompt, ta.response_tokens);
    for (std::size_t i = 0; i < lp.size(); ++i) CHECK(lp[i] == Catch::Approx(ta.logp_current[i]));
    Rng c(1);
    CHECK(sample_response(p, prompt, 1.0, 1, c).length() == 1);
}

TEST_CASE("checkpoints round trip exactly", "[policy]") {
    Vocab v(5);
    Rng rng(6);
    const auto p = testing::random_policy(v, 2, rng);
    const auto q = checkpoint_from_json(checkpoint_json(p));
    CHECK(q.theta == p.theta);
    CHECK(q.eos == p.eos);
    auto bad = p;
    bad.theta.pop_back();
    CHECK_THROWS_AS(bad.validate(), ArgumentError);
}
