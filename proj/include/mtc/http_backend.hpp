#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <string>

#include "mtc/model_backend.hpp"

namespace mtc {

// Connection settings for a hosted chat-completions endpoint.
// base_url is scheme://host[:port][/path-prefix]; requests go to
// {path-prefix}/chat/completions with a bearer token.
struct HttpBackendConfig {
    std::string base_url;
    std::string api_key;
    std::string model;
    bool supports_logprobs = true;
    int max_concurrent_requests = 4;
    double requests_per_minute = 0.0;  // 0 = unlimited
};

// Reads MTC_BASE_URL / MTC_API_KEY; throws ConfigError when either is unset.
HttpBackendConfig http_config_from_env(const std::string& model);

// Live adapter for the chat-completions wire shape. Transport failures and
// HTTP 429/5xx are retried with exponential backoff up to
// RequestOptions::max_retries; other statuses fail immediately. A reply is
// returned at most once per send() call.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config);
    ~HttpBackend() override;

    ModelReply send(const std::vector<ChatTurn>& conversation,
                    const RequestOptions& options) override;
    std::string id() const override { return "live:" + config_.model; }
    bool supports_logprobs() const override { return config_.supports_logprobs; }

    // Request body for a conversation; exposed for tests.
    static std::string build_request_body(const std::string& model,
                                          const std::vector<ChatTurn>& conversation,
                                          bool want_logprobs);
    // Parses a chat-completions response body into a reply.
    static ModelReply parse_response_body(const std::string& body, const std::string& backend_id);

private:
    struct Limiter;

    ModelReply send_once(const std::vector<ChatTurn>& conversation, const RequestOptions& options);

    HttpBackendConfig config_;
    std::string host_part_;  // scheme://host[:port]
    std::string path_prefix_;
    std::unique_ptr<Limiter> limiter_;
};

}  // namespace mtc
