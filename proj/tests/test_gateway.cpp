#include <catch_amalgamated.hpp>

#include "currl/error.hpp"
#include "currl/gateway.hpp"

using namespace currl;

namespace {

ChatRequest ask(const std::string& text) {
    ChatRequest r;
    r.messages.push_back({Role::user, text});
    return r;
}

class ScriptedTransport : public HttpTransport {
public:
    explicit ScriptedTransport(std::vector<HttpResult> script) : script_(std::move(script)) {}
    HttpResult post(const std::string&, const std::string& body,
                    const std::map<std::string, std::string>& headers) override {
        last_body = body;
        last_auth = headers.count("Authorization") ? headers.at("Authorization") : "";
        const auto r = script_[std::min(calls, script_.size() - 1)];
        ++calls;
        return r;
    }
    std::size_t calls = 0;
    std::string last_body, last_auth;

private:
    std::vector<HttpResult> script_;
};

const std::string kOk = R"({"choices":[{"message":{"role":"assistant","content":"hi"},"finish_reason":"stop"}]})";

}  // namespace

TEST_CASE("mock replies are a function of request and seed", "[gateway]") {
    MockGateway a(5), b(5), c(6);
    const auto req = ask("hello");
    CHECK(a.complete(req).content == b.complete(req).content);
    CHECK(a.complete(req).content != c.complete(req).content);

    MockGateway canned(5);
    canned.add_canned(canned.key_of(req), "fixed");
    CHECK(canned.complete(req).content == "fixed");
    CHECK(canned.calls() == 1);
}

TEST_CASE("empty conversations are rejected", "[gateway]") {
    MockGateway g;
    CHECK_THROWS_AS(g.complete(ChatRequest{}), ArgumentError);
}

TEST_CASE("wire format round trip", "[gateway]") {
    auto req = ask("q");
    req.model_id = "m";
    const auto w = to_wire(req);
    CHECK(w["model"] == "m");
    CHECK(w["messages"][0]["role"] == "user");
    CHECK(parse_wire_response(kOk).content == "hi");
    CHECK_THROWS_AS(parse_wire_response("{}"), ProtocolError);
    CHECK_THROWS_AS(parse_wire_response("not json"), ProtocolError);
}

TEST_CASE("server errors exhaust the retry budget", "[gateway]") {
    auto t = std::make_shared<ScriptedTransport>(std::vector<HttpResult>{{true, 500, "", ""}});
    GatewayConfig cfg;
    cfg.mock = false;
    cfg.url = "http://localhost:1/v1/chat/completions";
    cfg.max_retries = 2;
    std::vector<std::chrono::milliseconds> waits;
    HttpGateway g(cfg, "k", t, [&](std::chrono::milliseconds d) { waits.push_back(d); });
    CHECK_THROWS_AS(g.complete(ask("x")), TransportError);
    CHECK(t->calls == 3);
    REQUIRE(waits.size() == 2);
    CHECK(waits[1] == 2 * waits[0]);
    CHECK(t->last_auth == "Bearer k");
}

TEST_CASE("transient failures recover; client errors do not retry", "[gateway]") {
    GatewayConfig cfg;
    cfg.mock = false;
    cfg.url = "http://localhost:1/v1/chat/completions";
    auto flaky = std::make_shared<ScriptedTransport>(
        std::vector<HttpResult>{{false, 0, "", "refused"}, {true, 429, "", ""}, {true, 200, kOk, ""}});
    HttpGateway g(cfg, "k", flaky, [](auto) {});
    CHECK(g.complete(ask("x")).content == "hi");
    CHECK(flaky->calls == 3);

    auto denied = std::make_shared<ScriptedTransport>(std::vector<HttpResult>{{true, 401, "", ""}});
    HttpGateway d(cfg, "k", denied, [](auto) {});
    CHECK_THROWS_AS(d.complete(ask("x")), TransportError);
    CHECK(denied->calls == 1);
}
