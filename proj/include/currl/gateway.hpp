#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace currl {

enum class Role { system, user, assistant };

const char* to_string(Role r) noexcept;

struct ChatMessage {
    Role role = Role::user;
    std::string content;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    std::size_t max_tokens = 1024;
    std::string model_id;
};

enum class FinishReason { stop, length, error };

struct ChatResponse {
    std::string content;
    FinishReason finish_reason = FinishReason::stop;
};

// Throws ArgumentError when the request breaks the message invariants.
void validate(const ChatRequest& request);

// Chat-completions wire body: {"model", "messages", "temperature", "max_tokens"}.
nlohmann::ordered_json to_wire(const ChatRequest& request);

// Reads choices[0].message.content; ProtocolError on anything else.
ChatResponse parse_wire_response(const std::string& body);

class Gateway {
public:
    virtual ~Gateway() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
    // How many requests callers should keep in flight.
    virtual std::size_t parallelism() const { return 1; }
};

struct GatewayConfig {
    std::string url;
    std::string model_id = "mock";
    bool mock = true;
    std::size_t max_retries = 3;
    std::size_t parallelism = 8;
    std::chrono::milliseconds backoff{200};
    std::chrono::seconds timeout{120};
    std::uint64_t mock_seed = 0;
};

inline constexpr const char* kApiKeyEnv = "CURRL_API_KEY";

// Deterministic offline gateway. The reply is a pure function of the request
// content and the mock seed: canned replies are looked up by request key first,
// then the responder is consulted, then a seeded filler reply is produced.
class MockGateway : public Gateway {
public:
    using Responder = std::function<std::string(const ChatRequest&, std::uint64_t key)>;

    explicit MockGateway(std::uint64_t seed = 0, Responder responder = {},
                         std::size_t parallelism = 8);

    static std::uint64_t request_key(const ChatRequest& request, std::uint64_t seed);
    std::uint64_t key_of(const ChatRequest& request) const { return request_key(request, seed_); }

    void add_canned(std::uint64_t key, std::string reply);

    ChatResponse complete(const ChatRequest& request) override;
    std::size_t parallelism() const override { return parallelism_; }
    std::size_t calls() const noexcept { return calls_.load(); }

private:
    std::uint64_t seed_;
    Responder responder_;
    std::size_t parallelism_;
    std::map<std::uint64_t, std::string> canned_;
    std::atomic<std::size_t> calls_{0};
};

struct HttpResult {
    bool connected = false;  // false: the request never got a status line
    int status = 0;
    std::string body;
    std::string error;
};

class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResult post(const std::string& url, const std::string& body,
                            const std::map<std::string, std::string>& headers) = 0;
};

// cpp-httplib backed transport.
std::shared_ptr<HttpTransport> make_http_transport(std::chrono::seconds timeout);

// Chat-completions client. Connection failures, 429 and 5xx are retried up to
// max_retries times with exponential backoff; other statuses fail at once.
class HttpGateway : public Gateway {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    HttpGateway(GatewayConfig config, std::string api_key, std::shared_ptr<HttpTransport> transport,
                Sleeper sleeper = {});

    ChatResponse complete(const ChatRequest& request) override;
    std::size_t parallelism() const override { return config_.parallelism; }

private:
    GatewayConfig config_;
    std::string api_key_;
    std::shared_ptr<HttpTransport> transport_;
    Sleeper sleeper_;
};

// Mock when config.mock is set, otherwise an HttpGateway keyed by $CURRL_API_KEY.
std::unique_ptr<Gateway> make_gateway(const GatewayConfig& config,
                                      MockGateway::Responder responder = {});

}  // namespace currl
