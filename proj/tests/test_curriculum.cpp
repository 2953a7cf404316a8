#include <catch_amalgamated.hpp>

#include "currl/curriculum.hpp"
#include "currl/error.hpp"
#include "currl/text.hpp"

using namespace currl;

namespace {

VulnSample sample() { return {"s", "CWE-787", "d", "1 2 9 4", "", "1 2 3 4", Split::train}; }

// Order-2 policy that always answers with one uniformly drawn content token:
// <think> c </think> <answer> c' </answer> EOS.
PolicyParams one_token_answerer(const Vocab& v) {
    auto p = make_policy(v, 2);
    const Token n = static_cast<Token>(v.content_size());
    for (Token c = 0; c < n; ++c) {
        p.theta[p.weight_index(v.think_open(), 1, c)] = 20.0;
        p.theta[p.weight_index(c, 1, v.think_open())] = 10.0;
        p.theta[p.weight_index(c, 1, v.answer_open())] = 10.0;
    }
    p.theta[p.weight_index(v.think_close(), 2, v.think_open())] = 40.0;
    p.theta[p.weight_index(v.answer_close(), 2, v.answer_open())] = 40.0;
    p.theta[p.weight_index(v.answer_open(), 1, v.think_close())] = 20.0;
    p.theta[p.weight_index(v.eos(), 1, v.answer_close())] = 20.0;
    return p;
}

// Emits EOS immediately.
PolicyParams silent(const Vocab& v) {
    auto p = make_policy(v, 2);
    p.theta[p.bias_index(v.eos())] = 50.0;
    return p;
}

ReasoningDataset pool(std::size_t n) {
    ReasoningDataset ds;
    for (std::size_t i = 0; i < n; ++i)
        ds.records.push_back({"p" + std::to_string(i), "t", std::to_string(i) + " 0 0", "m", FilterStatus::kept, ""});
    return ds;
}

RlConfig sampling() {
    RlConfig c;
    c.max_prompt_len = 64;
    c.max_response_len = 16;
    return c;
}

}  // namespace

TEST_CASE("distractors come from the policy first", "[curriculum]") {
    Vocab v(16);
    Rng rng(4);
    const auto d = collect_distractors(sample(), one_token_answerer(v), v, pool(5), 3, 8, sampling(), rng);
    REQUIRE(d.size() == 3);
    for (const auto& a : d) CHECK(normalize_tokens(a).size() == 1);
    CHECK(d[0] != d[1]);
    CHECK(d[1] != d[2]);
}

TEST_CASE("unproductive policy falls back to the pool", "[curriculum]") {
    Vocab v(16);
    Rng rng(4);
    const auto d = collect_distractors(sample(), silent(v), v, pool(5), 3, 8, sampling(), rng);
    REQUIRE(d.size() == 3);
    for (const auto& a : d) CHECK(normalize_tokens(a).size() == 3);
    CHECK_THROWS_AS(collect_distractors(sample(), silent(v), v, pool(1), 3, 8, sampling(), rng),
                    ConstructionError);
}

TEST_CASE("multiple choice places the truth once", "[curriculum]") {
    const std::vector<std::string> d{"1 1 1 1", "2 2 2 2", "3 3 3 3"};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto m = build_multiple_choice(sample(), d, seed);
        int hits = 0;
        for (const auto& o : m.options) hits += token_equal(o, "1 2 3 4");
        CHECK(hits == 1);
        CHECK(token_equal(m.options[m.correct_letter - 'A'], "1 2 3 4"));
        CHECK(m.stem.find("1 2 9 4") != std::string::npos);
        CHECK(build_multiple_choice(sample(), d, seed).correct_letter == m.correct_letter);
    }
    CHECK_THROWS_AS(build_multiple_choice(sample(), {"1 2 3 4", "2", "3"}, 1), ArgumentError);
    CHECK_THROWS_AS(build_multiple_choice(sample(), {"1", "2"}, 1), ArgumentError);
}

TEST_CASE("letter extraction", "[curriculum]") {
    CHECK(extract_letter("<think> C </think><answer>x</answer>") == 'C');
    CHECK(extract_letter("<think>Cat</think><answer>B 1</answer>") == 'B');
    CHECK_FALSE(extract_letter("<think>1</think>").has_value());
}

TEST_CASE("easy-stage grading", "[curriculum]") {
    auto m = build_multiple_choice(sample(), {"1 1 1 1", "2 2 2 2", "3 3 3 3"}, 3);
    const std::string right(1, m.correct_letter);
    const std::string wrong(1, m.correct_letter == 'A' ? 'B' : 'A');

    auto r = grade_mcq("<think>" + right + "</think><answer>1 2 3 4</answer>", m, sample());
    CHECK(r.acc == 2.0);
    CHECK(r.format == 1.0);
    CHECK(r.total == 3.0);

    r = grade_mcq("<think>" + wrong + "</think><answer>1 2 3 4</answer>", m, sample());
    CHECK(r.acc == -2.0);
    CHECK(r.total == -1.0);

    r = grade_mcq("<think>" + right + "</think><answer>1 2 7 4</answer>", m, sample());
    CHECK(r.acc == 1.75);
}

TEST_CASE("prompt encodings", "[curriculum]") {
    Vocab v(16);
    const auto m = build_multiple_choice(sample(), {"1 1 1 1", "2 2 2 2", "3 3 3 3"}, 3);
    const auto hard = encode_hard_prompt(v, sample(), 64);
    const auto mcq = encode_mcq_prompt(v, sample(), m, 64);
    CHECK(hard.front() == v.bos());
    CHECK(mcq.size() == hard.size() + 4 + 16);
    CHECK(encode_mcq_prompt(v, sample(), m, 8).size() == 8);
    CHECK(encode_mcq_prompt(v, sample(), m, 8).front() == v.bos());
}

TEST_CASE("zero steps leave the policy alone", "[curriculum]") {
    Vocab v(16);
    VulnDataset tasks;
    tasks.records.push_back(sample());
    auto cfg = StageConfig::hard_defaults();
    cfg.steps = 0;
    OracleCritic critic;
    const auto p = one_token_answerer(v);
    const auto res = run_stage(p, tasks, cfg, critic, v, 1);
    CHECK(res.params.theta == p.theta);
    CHECK(res.log.empty());
}

TEST_CASE("easy stage needs a distractor source", "[curriculum]") {
    Vocab v(16);
    VulnDataset tasks;
    tasks.records.push_back(sample());
    auto cfg = StageConfig::easy_defaults();
    cfg.steps = 1;
    OracleCritic critic;
    CHECK_THROWS(run_stage(make_policy(v, 2), tasks, cfg, critic, v, 1, nullptr));
}

TEST_CASE("stage runs are reproducible", "[curriculum]") {
    Vocab v(16);
    const auto tasks = generate_toy_corpus(2, 12, 16, 5);
    auto cfg = StageConfig::hard_defaults();
    cfg.steps = 3;
    cfg.rl.batch_size = 4;
    cfg.rl.rollouts_per_prompt = 4;
    cfg.rl.max_prompt_len = 32;
    cfg.rl.max_response_len = 12;
    cfg.rl.learning_rate = 1.0;
    OracleCritic critic;
    const auto p = one_token_answerer(v);
    const auto a = run_stage(p, tasks, cfg, critic, v, 9, nullptr, 10);
    const auto b = run_stage(p, tasks, cfg, critic, v, 9, nullptr, 10);
    CHECK(a.log.to_csv() == b.log.to_csv());
    CHECK(a.params.theta == b.params.theta);
    REQUIRE(a.log.size() == 3);
    CHECK(a.log.rows().front().step == 11);
    CHECK_FALSE(a.log.rows().front().mcq_accuracy.has_value());
}
