#include "mtc/confidence.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

#include "mtc/errors.hpp"

namespace mtc {

std::string confidence_method_name(ConfidenceMethod method) {
    switch (method) {
        case ConfidenceMethod::overall: return "overall";
        case ConfidenceMethod::answer_only: return "answer_only";
        case ConfidenceMethod::random: return "random";
    }
    return "?";
}

std::optional<ConfidenceMethod> confidence_method_from_name(const std::string& name) {
    if (name == "overall") return ConfidenceMethod::overall;
    if (name == "answer_only") return ConfidenceMethod::answer_only;
    if (name == "random") return ConfidenceMethod::random;
    return std::nullopt;
}

std::string carg_mode_name(CargMode mode) {
    switch (mode) {
        case CargMode::off: return "off";
        case CargMode::overall: return "overall";
        case CargMode::answer_only: return "answer_only";
        case CargMode::random: return "random";
    }
    return "?";
}

std::optional<CargMode> carg_mode_from_name(const std::string& name) {
    if (name == "off") return CargMode::off;
    if (name == "overall") return CargMode::overall;
    if (name == "answer_only") return CargMode::answer_only;
    if (name == "random") return CargMode::random;
    return std::nullopt;
}

ConfidenceScore confidence_overall(const ModelReply& reply) {
    if (!reply.token_logprobs || reply.token_logprobs->empty()) {
        throw LogprobsUnavailableError("reply from " + reply.backend_id + " has no logprobs");
    }
    double sum = 0.0;
    for (const TokenLogprob& t : *reply.token_logprobs) sum += t.logprob;
    double mean = sum / static_cast<double>(reply.token_logprobs->size());
    return {std::exp(mean), ConfidenceMethod::overall, reply.token_logprobs->size()};
}

ConfidenceScore confidence_answer_only(const ModelReply& reply) {
    if (!reply.token_logprobs || reply.token_logprobs->empty()) {
        throw LogprobsUnavailableError("reply from " + reply.backend_id + " has no logprobs");
    }
    auto span = find_answer_span(reply.text);
    if (!span) {
        throw AnswerSpanError("reply has no \"The correct answer: X\" marker");
    }

    // Token offsets are only meaningful if concatenating tokens reproduces the
    // text; otherwise the span cannot be aligned.
    std::size_t total = 0;
    for (const TokenLogprob& t : *reply.token_logprobs) total += t.token.size();
    if (total != reply.text.size()) {
        throw AnswerSpanError("tokenization does not reproduce reply text");
    }

    double sum = 0.0;
    std::size_t count = 0;
    std::size_t offset = 0;
    for (const TokenLogprob& t : *reply.token_logprobs) {
        std::size_t begin = offset;
        std::size_t end = offset + t.token.size();
        if (begin < span->second && end > span->first) {
            if (reply.text.compare(begin, t.token.size(), t.token) != 0) {
                throw AnswerSpanError("tokenization does not reproduce reply text");
            }
            sum += t.logprob;
            ++count;
        }
        offset = end;
    }
    if (count == 0) throw AnswerSpanError("no tokens overlap the answer span");
    double mean = sum / static_cast<double>(count);
    return {std::exp(mean), ConfidenceMethod::answer_only, count};
}

RandomConfidenceSource::RandomConfidenceSource(std::uint64_t seed, double lo, double hi)
    : gen_(seed), lo_(lo), hi_(hi) {
    if (!(lo >= 0.0 && hi <= 1.0 && lo < hi)) {
        throw ConfigError("random confidence range must satisfy 0 <= lo < hi <= 1");
    }
}

ConfidenceScore RandomConfidenceSource::next() {
    double u = gen_.next_double();
    return {lo_ + (hi_ - lo_) * u, ConfidenceMethod::random, std::nullopt};
}

std::string format_confidence_annotation(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "[Confidence: %.1f%%]", value * 100.0);
    return buf;
}

std::vector<ChatTurn> embed_confidence(const std::vector<ChatTurn>& history,
                                       const std::vector<ConfidenceScore>& scores) {
    std::vector<ChatTurn> annotated = history;
    std::size_t next = 0;
    for (ChatTurn& turn : annotated) {
        if (turn.role != Role::assistant) continue;
        if (next >= scores.size()) {
            throw AlignmentError("more assistant turns than confidence scores");
        }
        turn.content += "\n" + format_confidence_annotation(scores[next].value);
        ++next;
    }
    if (next != scores.size()) {
        throw AlignmentError("more confidence scores than assistant turns");
    }
    return annotated;
}

std::string strip_confidence_annotation(const std::string& content) {
    std::size_t nl = content.rfind('\n');
    if (nl == std::string::npos) return content;
    std::string_view tail(content.data() + nl + 1, content.size() - nl - 1);

    constexpr std::string_view prefix = "[Confidence: ";
    if (tail.size() < prefix.size() + 5 || tail.substr(0, prefix.size()) != prefix) return content;
    if (tail.substr(tail.size() - 2) != "%]") return content;
    std::string_view number = tail.substr(prefix.size(), tail.size() - prefix.size() - 2);
    std::size_t dot = number.find('.');
    if (dot == 0 || dot == std::string_view::npos || dot + 2 != number.size()) return content;
    for (std::size_t i = 0; i < number.size(); ++i) {
        if (i == dot) continue;
        if (!std::isdigit(static_cast<unsigned char>(number[i]))) return content;
    }
    return content.substr(0, nl);
}

std::vector<ChatTurn> strip_confidence(const std::vector<ChatTurn>& history) {
    std::vector<ChatTurn> cleaned = history;
    for (ChatTurn& turn : cleaned) {
        if (turn.role == Role::assistant) turn.content = strip_confidence_annotation(turn.content);
    }
    return cleaned;
}

}  // namespace mtc
