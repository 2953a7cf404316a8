#include <catch_amalgamated.hpp>

#include "currl/error.hpp"
#include "currl/rng.hpp"
#include "currl/templates.hpp"
#include "currl/text.hpp"
#include "currl/vocab.hpp"

using namespace currl;

TEST_CASE("whitespace normalization", "[text]") {
    CHECK(normalize_tokens("  a\tb \n c  ") == std::vector<std::string>{"a", "b", "c"});
    CHECK(normalize_tokens("").empty());
    CHECK(token_equal("x  y", "x y"));
    CHECK_FALSE(token_equal("x y", "x z"));
    CHECK(trim("  q \n") == "q");
}

TEST_CASE("stable hash is FNV-1a", "[text]") {
    CHECK(stable_hash("") == 0xcbf29ce484222325ULL);
    CHECK(stable_hash("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("rng streams are reproducible and bounded", "[text]") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    Rng c = Rng::derive(1, 2, 3), d = Rng::derive(1, 2, 4);
    CHECK(c.next() != d.next());
    Rng r(7);
    for (int i = 0; i < 1000; ++i) {
        CHECK(r.below(5) < 5);
        const double u = r.uniform();
        CHECK((u >= 0.0 && u < 1.0));
    }
}

TEST_CASE("template sections and substitution", "[text]") {
    CHECK(render_template("a {{x}} b", {{"x", "1"}}) == "a 1 b");
    CHECK(render_template("{{#c}}has {{c}}{{/c}}.", {{"c", ""}}) == ".");
    CHECK(render_template("{{#c}}has {{c}}{{/c}}.", {{"c", "z"}}) == "has z.");
    CHECK_THROWS_AS(render_template("{{missing}}", {}), ArgumentError);
    CHECK_THROWS_AS(render_template("{{#c}}open", {{"c", "v"}}), ArgumentError);
    const auto s = split_sections("[[one]]\nA\n[[two]]\nB\n");
    CHECK(s.size() == 2);
    CHECK(trim(s.at("one")) == "A");
}

TEST_CASE("vocab layout and tokenization", "[text]") {
    Vocab v(16);
    CHECK(v.size() == 26);
    CHECK(v.letter('A') == 16);
    CHECK(v.bos() == 20);
    const auto toks = v.tokenize("<think>3</think> <answer>1 2 zz</answer>");
    CHECK(toks == std::vector<Token>{v.think_open(), 3, v.think_close(), v.answer_open(), 1, 2,
                                     v.answer_close()});
    CHECK(v.render({1, 2, v.eos()}) == "1 2");
}
