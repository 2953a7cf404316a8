#include <catch_amalgamated.hpp>

#include <cmath>

#include "currl/error.hpp"
#include "currl/rlcore.hpp"
#include "support.hpp"

using namespace currl;

namespace {

RlConfig plain() {
    RlConfig c;
    c.kl_beta = 0.0;
    c.kl_in_loss = false;
    c.kl_in_reward = false;
    return c;
}

// One response token whose ratio to pi_old is `rho` under `p`.
RolloutGroup single_token(const PolicyParams& p, double rho, double adv) {
    Trajectory t;
    t.prompt_tokens = {1};
    t.response_tokens = {2};
    const double lp = logprobs(p, t.prompt_tokens, t.response_tokens)[0];
    t.logp_current = {lp};
    t.logp_old = {lp - std::log(rho)};
    t.logp_ref = {lp};
    t.kl_terms = {0.0};
    RolloutGroup g;
    g.prompt_id = "p";
    g.trajectories = {t};
    g.advantages = {{adv}};
    return g;
}

bool all_zero(const std::vector<double>& v) {
    for (double x : v)
        if (x != 0.0) return false;
    return true;
}

}  // namespace

TEST_CASE("k3 estimator values", "[rlcore]") {
    CHECK(kl_term(-1.3, -1.3) == 0.0);
    CHECK(kl_term(0.0, std::log(2.0)) == Catch::Approx(2.0 - std::log(2.0) - 1.0).epsilon(1e-12));
    CHECK(kl_term(0.0, std::log(0.5)) == Catch::Approx(0.5 - std::log(0.5) - 1.0).epsilon(1e-12));
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) CHECK(kl_term(-10 * rng.uniform(), -10 * rng.uniform()) >= 0.0);
}

TEST_CASE("shaped rewards subtract the KL sum", "[rlcore]") {
    RolloutGroup g;
    Trajectory t;
    t.response_tokens = {1, 2};
    t.kl_terms = {0.1, 0.3};
    t.terminal_reward = 2.0;
    g.trajectories = {t};
    RlConfig c;
    c.kl_beta = 0.01;
    CHECK(shaped_rewards(g, c)[0] == Catch::Approx(1.996).epsilon(1e-14));
    c.kl_beta = 0.0;
    CHECK(shaped_rewards(g, c)[0] == 2.0);
}

TEST_CASE("group advantages use the population std", "[rlcore]") {
    const auto a = group_advantages({-2.0, 2.0}, 1e-6);
    CHECK(a[0] == Catch::Approx(-1.0));
    CHECK(a[1] == Catch::Approx(1.0));
    CHECK(group_advantages({1, 1, 1, 1}, 1e-6) == std::vector<double>(4, 0.0));
    const auto b = group_advantages({0, 1, 2, 3}, 1e-6);
    const double want[] = {-1.34164, -0.44721, 0.44721, 1.34164};
    for (int i = 0; i < 4; ++i) CHECK(b[i] == Catch::Approx(want[i]).margin(1e-5));
}

TEST_CASE("clip arithmetic and gradient masking", "[rlcore]") {
    Vocab v(4);
    Rng rng(5);
    const auto p = testing::random_policy(v, 1, rng);
    const auto cfg = plain();

    auto same = surrogate_loss(single_token(p, 1.0, 1.0), p, cfg);
    CHECK(same.objective == Catch::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(all_zero(same.gradient));

    auto high = surrogate_loss(single_token(p, 1.5, 1.0), p, cfg);
    CHECK(high.objective == Catch::Approx(1.2).epsilon(1e-12));
    CHECK(all_zero(high.gradient));

    auto low = surrogate_loss(single_token(p, 0.5, -1.0), p, cfg);
    CHECK(low.objective == Catch::Approx(-0.8).epsilon(1e-12));
    CHECK(all_zero(low.gradient));

    // the other side of the band is not clipped
    CHECK_FALSE(all_zero(surrogate_loss(single_token(p, 0.5, 1.0), p, cfg).gradient));
}

TEST_CASE("surrogate requires advantages", "[rlcore]") {
    Vocab v(4);
    auto g = single_token(make_policy(v, 1), 1.0, 1.0);
    g.advantages.clear();
    CHECK_THROWS_AS(surrogate_loss(g, make_policy(v, 1), plain()), StateError);
}

TEST_CASE("updates vanish without signal", "[rlcore]") {
    Vocab v(4);
    Rng rng(3);
    const auto p = testing::random_policy(v, 1, rng);
    auto g = single_token(p, 1.0, 0.0);
    auto [same, stats] = policy_update(p, {g}, plain());
    CHECK(same.theta == p.theta);

    auto cfg = plain();
    cfg.learning_rate = 0.0;
    auto g2 = single_token(p, 1.0, 1.0);
    auto [frozen, s2] = policy_update(p, {g2}, cfg);
    CHECK(frozen.theta == p.theta);
    CHECK(s2.grad_norm > 0.0);
}

TEST_CASE("tail-sum advantages stay normalized per token", "[rlcore]") {
    Vocab v(4);
    Rng rng(12);
    const auto p = testing::random_policy(v, 1, rng);
    RolloutGroup g;
    for (int i = 0; i < 5; ++i) {
        auto t = sample_response(p, std::vector<Token>{v.bos()}, 1.0, 6, rng);
        annotate_trajectory(t, testing::random_policy(v, 1, rng));
        t.terminal_reward = rng.uniform();
        g.trajectories.push_back(t);
    }
    RlConfig c;
    c.kl_tail_sum = true;
    compute_advantages(g, c);
    REQUIRE(g.advantages.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(g.advantages[i].size() == g.trajectories[i].length());
}
