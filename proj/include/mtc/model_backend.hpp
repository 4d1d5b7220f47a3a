#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mtc/question_bank.hpp"

namespace mtc {

enum class Role { system, user, assistant };

std::string role_name(Role role);
std::optional<Role> role_from_name(const std::string& name);

struct ChatTurn {
    Role role = Role::user;
    std::string content;
};

struct TokenLogprob {
    std::string token;
    double logprob = 0.0;  // always <= 0
};

struct ModelReply {
    std::string text;
    std::optional<std::vector<TokenLogprob>> token_logprobs;
    std::chrono::milliseconds latency{0};
    std::string backend_id;
};

struct RequestOptions {
    bool want_logprobs = true;
    std::chrono::milliseconds timeout{120'000};
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{500};
};

// Uniform conversation interface over chat models. Implementations must be
// callable from multiple workers concurrently. One send() call yields at most
// one reply; internal retries only re-issue requests that produced no reply.
class Backend {
public:
    virtual ~Backend() = default;
    virtual ModelReply send(const std::vector<ChatTurn>& conversation,
                            const RequestOptions& options) = 0;
    virtual std::string id() const = 0;
    virtual bool supports_logprobs() const = 0;
};

inline constexpr const char* kAnswerMarker = "The correct answer:";

// Character span [begin, end) of the last "The correct answer: X" occurrence
// whose X is a valid label at a word boundary; end points one past X.
std::optional<std::pair<std::size_t, std::size_t>> find_answer_span(const std::string& text);

// Extracts the answer label from a reply, tolerating trailing punctuation and
// option text after the label. nullopt = parse failure (the round is scored
// incorrect and flagged).
std::optional<AnswerLabel> parse_answer(const std::string& text);

}  // namespace mtc
