#include "mtc/http_backend.hpp"

#include <condition_variable>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "mtc/errors.hpp"

namespace mtc {

using nlohmann::json;

HttpBackendConfig http_config_from_env(const std::string& model) {
    const char* base_url = std::getenv("MTC_BASE_URL");
    const char* api_key = std::getenv("MTC_API_KEY");
    if (!base_url || !*base_url) throw ConfigError("MTC_BASE_URL is not set");
    if (!api_key || !*api_key) throw ConfigError("MTC_API_KEY is not set");
    HttpBackendConfig config;
    config.base_url = base_url;
    config.api_key = api_key;
    config.model = model;
    return config;
}

// Per-backend concurrent-request cap plus a minimum inter-request interval.
struct HttpBackend::Limiter {
    explicit Limiter(const HttpBackendConfig& config)
        : max_in_flight(config.max_concurrent_requests),
          min_interval(config.requests_per_minute > 0.0
                           ? std::chrono::milliseconds(
                                 static_cast<long>(60'000.0 / config.requests_per_minute))
                           : std::chrono::milliseconds(0)) {}

    void acquire() {
        std::unique_lock lock(mutex);
        cv.wait(lock, [&] { return in_flight < max_in_flight; });
        ++in_flight;
        if (min_interval.count() > 0) {
            auto now = std::chrono::steady_clock::now();
            auto earliest = last_request + min_interval;
            if (earliest > now) {
                lock.unlock();
                std::this_thread::sleep_until(earliest);
                lock.lock();
            }
            last_request = std::chrono::steady_clock::now();
        }
    }

    void release() {
        {
            std::lock_guard lock(mutex);
            --in_flight;
        }
        cv.notify_one();
    }

    std::mutex mutex;
    std::condition_variable cv;
    int in_flight = 0;
    const int max_in_flight;
    const std::chrono::milliseconds min_interval;
    std::chrono::steady_clock::time_point last_request{};
};

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) throw ConfigError("http backend: base_url is empty");
    if (config_.max_concurrent_requests < 1) {
        throw ConfigError("http backend: max_concurrent_requests must be >= 1");
    }
    std::size_t scheme_end = config_.base_url.find("://");
    std::size_t path_start = scheme_end == std::string::npos
                                 ? config_.base_url.find('/')
                                 : config_.base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        host_part_ = config_.base_url;
    } else {
        host_part_ = config_.base_url.substr(0, path_start);
        path_prefix_ = config_.base_url.substr(path_start);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    }
    limiter_ = std::make_unique<Limiter>(config_);
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::build_request_body(const std::string& model,
                                            const std::vector<ChatTurn>& conversation,
                                            bool want_logprobs) {
    json messages = json::array();
    for (const ChatTurn& turn : conversation) {
        messages.push_back({{"role", role_name(turn.role)}, {"content", turn.content}});
    }
    json body = {{"model", model}, {"messages", messages}};
    if (want_logprobs) body["logprobs"] = true;
    return body.dump();
}

ModelReply HttpBackend::parse_response_body(const std::string& body,
                                            const std::string& backend_id) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error& e) {
        throw MalformedPayloadError(std::string("response is not JSON: ") + e.what());
    }
    if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
        throw MalformedPayloadError("response has no choices");
    }
    const json& choice = j["choices"][0];
    if (!choice.contains("message") || !choice["message"].contains("content") ||
        !choice["message"]["content"].is_string()) {
        throw MalformedPayloadError("response choice has no message content");
    }
    ModelReply reply;
    reply.text = choice["message"]["content"].get<std::string>();
    reply.backend_id = backend_id;

    if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
        choice["logprobs"].contains("content") && choice["logprobs"]["content"].is_array()) {
        std::vector<TokenLogprob> logprobs;
        for (const json& entry : choice["logprobs"]["content"]) {
            if (!entry.contains("token") || !entry.contains("logprob")) {
                throw MalformedPayloadError("logprob entry missing token or logprob");
            }
            double lp = entry["logprob"].get<double>();
            if (lp > 0.0) throw MalformedPayloadError("logprob entry is positive");
            logprobs.push_back({entry["token"].get<std::string>(), lp});
        }
        reply.token_logprobs = std::move(logprobs);
    }
    return reply;
}

ModelReply HttpBackend::send_once(const std::vector<ChatTurn>& conversation,
                                  const RequestOptions& options) {
    httplib::Client client(host_part_);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
    client.set_connection_timeout(secs.count(), 0);
    client.set_read_timeout(secs.count(), 0);
    client.set_write_timeout(secs.count(), 0);

    httplib::Headers headers = {{"Authorization", "Bearer " + config_.api_key}};
    std::string body = build_request_body(
        config_.model, conversation, options.want_logprobs && config_.supports_logprobs);

    auto start = std::chrono::steady_clock::now();
    httplib::Result result =
        client.Post(path_prefix_ + "/chat/completions", headers, body, "application/json");
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);

    if (!result) {
        throw TransportError("request to " + host_part_ +
                             " failed: " + httplib::to_string(result.error()));
    }
    if (result->status == 429) {
        throw RateLimitedError("rate limited by " + host_part_);
    }
    if (result->status >= 500) {
        throw TransportError("server error " + std::to_string(result->status) + " from " +
                             host_part_);
    }
    if (result->status != 200) {
        throw BackendError("unexpected status " + std::to_string(result->status) + " from " +
                           host_part_ + ": " + result->body);
    }
    ModelReply reply = parse_response_body(result->body, id());
    reply.latency = elapsed;
    return reply;
}

ModelReply HttpBackend::send(const std::vector<ChatTurn>& conversation,
                             const RequestOptions& options) {
    if (conversation.empty() || conversation.back().role != Role::user) {
        throw BackendError("conversation must end with a user turn");
    }
    limiter_->acquire();
    struct Release {
        Limiter* limiter;
        ~Release() { limiter->release(); }
    } release{limiter_.get()};

    auto backoff = options.initial_backoff;
    for (int attempt = 0;; ++attempt) {
        try {
            return send_once(conversation, options);
        } catch (const TransportError&) {
            if (attempt >= options.max_retries) throw;
        } catch (const RateLimitedError&) {
            if (attempt >= options.max_retries) throw;
        }
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
    }
}

}  // namespace mtc
