#include <catch_amalgamated.hpp>

#include <filesystem>

#include "currl/corpus.hpp"
#include "currl/error.hpp"
#include "currl/text.hpp"

using namespace currl;

namespace {

std::string line(const std::string& id) {
    return R"({"id":")" + id +
           R"(","cwe_id":"CWE-787","description":"d","vulnerable_code":"a b","context":"","ground_truth_fix":"a c","split":"train"})";
}

ReasoningDataset records(std::initializer_list<const char*> ids, DatasetTag tag) {
    ReasoningDataset ds;
    ds.tag = tag;
    for (const char* id : ids) ds.records.push_back({id, "t", "a", "m", FilterStatus::kept, ""});
    return ds;
}

}  // namespace

TEST_CASE("jsonl load counts records", "[corpus]") {
    const auto ds = parse_dataset<VulnSample>(line("a") + "\n" + line("b") + "\n" + line("c") + "\n");
    CHECK(ds.size() == 3);
    CHECK(ds.records[1].id == "b");
    CHECK(parse_dataset<VulnSample>("").empty());
}

TEST_CASE("duplicate id cites its line", "[corpus]") {
    try {
        parse_dataset<VulnSample>(line("a") + "\n" + line("a") + "\n");
        FAIL("expected an integrity error");
    } catch (const IntegrityError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse_dataset<VulnSample>(line("a") + "\n{not json\n"), ParseError);
}

TEST_CASE("records survive a save/load round trip", "[corpus]") {
    VulnDataset ds = generate_toy_corpus(3, 12, 16, 6);
    ReasoningSample rs{"toy-3-0", "why", "1 2", "m", FilterStatus::rejected_rule_3, "<think>x"};
    ReasoningDataset rd;
    rd.records.push_back(rs);
    const auto dir = std::filesystem::temp_directory_path() / "currl-corpus-test";
    std::filesystem::create_directories(dir);
    save_dataset(ds, (dir / "v.jsonl").string());
    save_dataset(rd, (dir / "r.jsonl").string());
    CHECK(load_dataset<VulnSample>((dir / "v.jsonl").string()).records == ds.records);
    CHECK(load_dataset<ReasoningSample>((dir / "r.jsonl").string()).records == rd.records);
    std::filesystem::remove_all(dir);
}

TEST_CASE("canonical raw is not serialized", "[corpus]") {
    ReasoningSample rs{"s", "t", "a", "m", FilterStatus::kept, render_tagged("t", "a")};
    CHECK_FALSE(to_json(rs).contains("raw"));
    CHECK(reasoning_from_json(to_json(rs)).raw == rs.raw);
}

TEST_CASE("settle allows only unfiltered to terminal", "[corpus]") {
    ReasoningSample rs;
    settle(rs, FilterStatus::kept);
    CHECK(rs.filter_status == FilterStatus::kept);
    CHECK_THROWS_AS(settle(rs, FilterStatus::rejected_model), StateError);
}

TEST_CASE("mixing is a seeded disjoint union", "[corpus]") {
    const auto vul = records({"v1", "v2", "v3", "v4", "v5"}, DatasetTag::d_vul);
    const auto code = records({"c1", "c2", "c3"}, DatasetTag::d_code);
    const auto m1 = mix_datasets(vul, code, 7), m2 = mix_datasets(vul, code, 7);
    CHECK(m1.size() == 8);
    CHECK(m1.tag == DatasetTag::d_mixed);
    CHECK(m1.records == m2.records);

    const auto only = mix_datasets(vul, ReasoningDataset{}, 7);
    CHECK(only.size() == 5);
    CHECK_THROWS_AS(mix_datasets(records({"s1"}, DatasetTag::d_vul), records({"s1"}, DatasetTag::d_code), 1),
                    IntegrityError);
}

TEST_CASE("toy corpus plants exactly one corruption", "[corpus]") {
    const auto ds = generate_toy_corpus(1, 10, 16, 8);
    REQUIRE(ds.size() == 10);
    for (const auto& s : ds.records) {
        const auto a = normalize_tokens(s.vulnerable_code), b = normalize_tokens(s.ground_truth_fix);
        REQUIRE(a.size() == b.size());
        int diff = 0;
        for (std::size_t i = 0; i < a.size(); ++i) diff += a[i] != b[i];
        CHECK(diff == 1);
    }
    CHECK(serialize_dataset(ds) == serialize_dataset(generate_toy_corpus(1, 10, 16, 8)));
    CHECK_THROWS_AS(generate_toy_corpus(1, 10, 3, 8), ArgumentError);
}

TEST_CASE("perturbed successor keeps a single cycle", "[corpus]") {
    const auto succ = toy_successor(5, 16);
    for (std::size_t swaps : {0u, 1u, 3u}) {
        const auto p = perturb_successor(succ, swaps, 9);
        int at = 0;
        std::size_t steps = 0;
        do {
            at = p[static_cast<std::size_t>(at)];
            ++steps;
        } while (at != 0 && steps <= p.size());
        CHECK(steps == p.size());
        if (swaps == 0) CHECK(p == succ);
    }
}

TEST_CASE("selection set names the correct letter", "[corpus]") {
    const auto sel = generate_toy_selection_set(4, 20, 16, 6, toy_successor(4, 16));
    REQUIRE(sel.samples.size() == sel.reasoning.size());
    for (std::size_t i = 0; i < sel.samples.size(); ++i) {
        const auto ctx = normalize_tokens(sel.samples.records[i].context);
        const auto letter = sel.reasoning.records[i].think;
        std::string picked;
        for (std::size_t k = 0; k < ctx.size(); ++k) {
            if (ctx[k] != letter) continue;
            std::vector<std::string> seq;
            for (std::size_t j = k + 1; j < ctx.size() && !(ctx[j] >= "A" && ctx[j] <= "D"); ++j)
                seq.push_back(ctx[j]);
            picked = join(seq, " ");
        }
        CHECK(token_equal(picked, sel.reasoning.records[i].answer));
    }
}
