#include "currl/gateway.hpp"

#include <cstdio>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "currl/error.hpp"
#include "currl/text.hpp"

namespace currl {

const char* to_string(Role r) noexcept {
    switch (r) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

void validate(const ChatRequest& request) {
    if (request.messages.empty()) throw ArgumentError("chat request has no messages");
    if (request.messages.front().role == Role::assistant)
        throw ArgumentError("first chat message must be system or user");
    if (!(request.temperature >= 0.0)) throw ArgumentError("temperature must be >= 0");
    if (request.max_tokens == 0) throw ArgumentError("max_tokens must be positive");
}

nlohmann::ordered_json to_wire(const ChatRequest& request) {
    nlohmann::ordered_json body;
    body["model"] = request.model_id;
    auto& msgs = body["messages"] = nlohmann::ordered_json::array();
    for (const auto& m : request.messages) {
        nlohmann::ordered_json jm;
        jm["role"] = to_string(m.role);
        jm["content"] = m.content;
        msgs.push_back(std::move(jm));
    }
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    return body;
}

ChatResponse parse_wire_response(const std::string& body) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception&) {
        throw ProtocolError("chat endpoint returned non-JSON body");
    }
    try {
        const auto& choice = j.at("choices").at(0);
        ChatResponse r;
        r.content = choice.at("message").at("content").get<std::string>();
        const std::string reason = choice.value("finish_reason", std::string("stop"));
        r.finish_reason = reason == "length" ? FinishReason::length : FinishReason::stop;
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(std::string("unexpected chat response shape: ") + e.what());
    }
}

// ---------------------------------------------------------------------------

MockGateway::MockGateway(std::uint64_t seed, Responder responder, std::size_t parallelism)
    : seed_(seed), responder_(std::move(responder)), parallelism_(parallelism) {}

std::uint64_t MockGateway::request_key(const ChatRequest& request, std::uint64_t seed) {
    return stable_hash(to_wire(request).dump()) ^ (seed * 0x9e3779b97f4a7c15ULL);
}

void MockGateway::add_canned(std::uint64_t key, std::string reply) {
    canned_[key] = std::move(reply);
}

ChatResponse MockGateway::complete(const ChatRequest& request) {
    validate(request);
    ++calls_;
    const auto key = key_of(request);
    ChatResponse r;
    if (auto it = canned_.find(key); it != canned_.end()) {
        r.content = it->second;
    } else if (responder_) {
        r.content = responder_(request, key);
    } else {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(key));
        r.content = std::string("mock reply ") + buf;
    }
    return r;
}

// ---------------------------------------------------------------------------

namespace {

class HttplibTransport : public HttpTransport {
public:
    explicit HttplibTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

    HttpResult post(const std::string& url, const std::string& body,
                    const std::map<std::string, std::string>& headers) override {
        // Split "scheme://host[:port]" from the path.
        const auto scheme_end = url.find("://");
        const auto path_start =
            url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
        const std::string origin = url.substr(0, path_start);
        const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

        HttpResult out;
        try {
            httplib::Client client(origin);
            client.set_connection_timeout(timeout_.count(), 0);
            client.set_read_timeout(timeout_.count(), 0);
            httplib::Headers h;
            for (const auto& [k, v] : headers) h.emplace(k, v);
            auto res = client.Post(path, h, body, "application/json");
            if (!res) {
                out.error = httplib::to_string(res.error());
                return out;
            }
            out.connected = true;
            out.status = res->status;
            out.body = res->body;
        } catch (const std::exception& e) {
            out.error = e.what();
        }
        return out;
    }

private:
    std::chrono::seconds timeout_;
};

}  // namespace

std::shared_ptr<HttpTransport> make_http_transport(std::chrono::seconds timeout) {
    return std::make_shared<HttplibTransport>(timeout);
}

HttpGateway::HttpGateway(GatewayConfig config, std::string api_key,
                         std::shared_ptr<HttpTransport> transport, Sleeper sleeper)
    : config_(std::move(config)),
      api_key_(std::move(api_key)),
      transport_(std::move(transport)),
      sleeper_(std::move(sleeper)) {
    if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    if (config_.url.empty()) throw ConfigError("gateway.url is not set");
}

ChatResponse HttpGateway::complete(const ChatRequest& request) {
    validate(request);
    ChatRequest req = request;
    if (req.model_id.empty()) req.model_id = config_.model_id;
    const std::string body = to_wire(req).dump();
    const std::map<std::string, std::string> headers = {
        {"Authorization", "Bearer " + api_key_},
    };

    std::string last_error;
    for (std::size_t attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) sleeper_(config_.backoff * (1LL << (attempt - 1)));
        HttpResult res = transport_->post(config_.url, body, headers);
        if (!res.connected) {
            last_error = "connection failed: " + res.error;
            continue;
        }
        if (res.status == 429 || res.status >= 500) {
            last_error = "HTTP " + std::to_string(res.status);
            continue;
        }
        if (res.status < 200 || res.status >= 300)
            throw TransportError("chat endpoint returned HTTP " + std::to_string(res.status));
        return parse_wire_response(res.body);
    }
    throw TransportError("chat request failed after " + std::to_string(config_.max_retries + 1) +
                         " attempts (" + last_error + ")");
}

std::unique_ptr<Gateway> make_gateway(const GatewayConfig& config,
                                      MockGateway::Responder responder) {
    if (config.mock)
        return std::make_unique<MockGateway>(config.mock_seed, std::move(responder),
                                             config.parallelism);
    const char* key = std::getenv(kApiKeyEnv);
    if (!key || !*key) throw ConfigError(std::string("environment variable ") + kApiKeyEnv +
                                         " is not set and gateway.mock is false");
    return std::make_unique<HttpGateway>(config, key, make_http_transport(config.timeout));
}

}  // namespace currl
