#include <catch_amalgamated.hpp>

#include <cmath>

#include "currl/error.hpp"
#include "currl/sft.hpp"
#include "support.hpp"

using namespace currl;

TEST_CASE("uniform policy loss is T ln V", "[sft]") {
    auto p = PolicyParams::zeros(4, 1);
    SftBatch b{{SftItem::from_prompt_target({0}, {1, 2, 3})}};
    CHECK(sft_loss(p, b).loss == Catch::Approx(3.0 * std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("a confident policy has near-zero loss", "[sft]") {
    auto p = PolicyParams::zeros(3, 1);
    for (Token prev = 0; prev < 3; ++prev) p.theta[p.weight_index((prev + 1) % 3, 1, prev)] = 60.0;
    SftBatch b{{SftItem::from_prompt_target({0}, {1, 2, 0})}};
    CHECK(sft_loss(p, b).loss < 1e-20);
}

TEST_CASE("prompt positions carry no loss", "[sft]") {
    const auto item = SftItem::from_prompt_target({5, 6, 7}, {1, 2});
    CHECK(item.target_count() == 2);
    int masked = 0;
    for (bool m : item.loss_mask) masked += m;
    CHECK(masked == 2);
}

TEST_CASE("sft gradient matches finite differences", "[sft]") {
    Vocab v(4);
    Rng rng(21);
    for (int trial = 0; trial < 5; ++trial) {
        const auto p = testing::random_policy(v, 2, rng);
        SftBatch b;
        for (int i = 0; i < 3; ++i)
            b.items.push_back(SftItem::from_prompt_target(testing::random_tokens(2, v.size(), rng),
                                                          testing::random_tokens(3, v.size(), rng)));
        const auto analytic = sft_loss(p, b).gradient;
        const auto numeric = testing::numeric_gradient([&](const PolicyParams& q) { return sft_loss(q, b).loss; }, p);
        CHECK(testing::max_relative_error(analytic, numeric) < 1e-4);
    }
}

TEST_CASE("bad batches are rejected", "[sft]") {
    auto p = PolicyParams::zeros(4, 1);
    CHECK_THROWS_AS(sft_loss(p, SftBatch{}), ArgumentError);
    CHECK_THROWS_AS(sft_loss(p, SftBatch{{SftItem::from_prompt_target({1}, {})}}), ArgumentError);
}

TEST_CASE("training is seeded and zero epochs is a no-op", "[sft]") {
    Vocab v(4);
    std::vector<SftItem> items;
    Rng rng(2);
    for (int i = 0; i < 20; ++i)
        items.push_back(SftItem::from_prompt_target({v.bos()}, testing::random_tokens(3, 4, rng)));
    const auto p = make_policy(v, 1);
    SftConfig c;
    c.epochs = 0;
    CHECK(sft_train(p, items, c).first.theta == p.theta);
    c.epochs = 5;
    c.batch_size = 4;
    const auto [a, la] = sft_train(p, items, c);
    const auto [b, lb] = sft_train(p, items, c);
    REQUIRE(la.size() == 5);
    CHECK(a.theta == b.theta);
    for (std::size_t i = 0; i < la.size(); ++i) CHECK(la[i].mean_loss == lb[i].mean_loss);
    CHECK(la.back().mean_loss < la.front().mean_loss);
}

TEST_CASE("items join records with their samples", "[sft]") {
    Vocab v(16);
    std::map<std::string, VulnSample> samples{{"s", {"s", "CWE-1", "d", "1 2", "", "1 3", Split::train}}};
    ReasoningDataset ds;
    ds.records.push_back({"s", "2", "1 3", "m", FilterStatus::kept, ""});
    const auto items = build_sft_items(ds, samples, v);
    REQUIRE(items.size() == 1);
    CHECK(items[0].target_count() == encode_tagged_target(v, "2", "1 3").size());
    ds.records[0].sample_id = "ghost";
    CHECK_THROWS_AS(build_sft_items(ds, samples, v), IntegrityError);
    ds.records[0] = {"s", "", "1 3", "m", FilterStatus::kept, ""};
    CHECK_THROWS_AS(build_sft_items(ds, samples, v), ArgumentError);
}
