#include <catch_amalgamated.hpp>

#include "currl/error.hpp"
#include "currl/rac.hpp"

using namespace currl;

namespace {

VulnSample sample() {
    return {"s1", "CWE-190", "integer overflow in size", "int n = a * b;", "", "size_t n = mul(a, b);",
            Split::train};
}

MockGateway fixed(const std::string& reply) {
    return MockGateway(0, [reply](const ChatRequest&, std::uint64_t) { return reply; });
}

}  // namespace

TEST_CASE("prompt carries the sample and both tag markers", "[rac]") {
    const auto p = build_rac_prompt(sample());
    CHECK(p.rendered.find("CWE-190") != std::string::npos);
    CHECK(p.rendered.find("<think>") != std::string::npos);
    CHECK(p.rendered.find("<answer>") != std::string::npos);
    CHECK(p.rendered.find("size_t n = mul(a, b);") != std::string::npos);
    CHECK(p.rendered.find("Additional context") == std::string::npos);

    auto s = sample();
    s.context = "struct buf {};";
    CHECK(build_rac_prompt(s).rendered.find("struct buf {};") != std::string::npos);
}

TEST_CASE("tagged reply becomes a reasoning record", "[rac]") {
    auto gw = fixed("<think>t</think><answer>a</answer>");
    const auto rs = generate_reasoning(sample(), gw);
    CHECK(rs.think == "t");
    CHECK(rs.answer == "a");
    CHECK(rs.sample_id == "s1");
    CHECK(rs.filter_status == FilterStatus::unfiltered);
}

TEST_CASE("surrounding prose survives only in raw", "[rac]") {
    const std::string reply = "Sure.\n<think>why</think>\n<answer>fix</answer>\nDone.";
    auto gw = fixed(reply);
    const auto rs = generate_reasoning(sample(), gw);
    CHECK(rs.think == "why");
    CHECK(rs.answer == "fix");
    CHECK(rs.raw == reply);
}

TEST_CASE("untagged replies are retried then fail", "[rac]") {
    auto gw = fixed("no tags at all");
    RacOptions opt;
    opt.attempts = 2;
    try {
        generate_reasoning(sample(), gw, opt);
        FAIL("expected a generation error");
    } catch (const GenerationError& e) {
        CHECK(e.last_raw() == "no tags at all");
    }
    CHECK(gw.calls() == 2);
}

TEST_CASE("batch keeps input order and records failures", "[rac]") {
    VulnDataset ds;
    for (int i = 0; i < 6; ++i) {
        auto s = sample();
        s.id = "s" + std::to_string(i);
        s.description = i == 3 ? "broken" : "fine";
        ds.records.push_back(s);
    }
    MockGateway gw(0, [](const ChatRequest& r, std::uint64_t) {
        return r.messages.back().content.find("broken") != std::string::npos
                   ? std::string("oops")
                   : std::string("<think>t</think><answer>a</answer>");
    });
    const auto res = generate_reasoning_batch(ds, gw);
    REQUIRE(res.generated.size() == 5);
    CHECK(res.generated.records[3].sample_id == "s4");
    REQUIRE(res.failures.size() == 1);
    CHECK(res.failures[0].first == "s3");
}
