#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mtc/model_backend.hpp"
#include "mtc/rng.hpp"

namespace mtc {

enum class ConfidenceMethod { overall, answer_only, random };

std::string confidence_method_name(ConfidenceMethod method);
std::optional<ConfidenceMethod> confidence_method_from_name(const std::string& name);

struct ConfidenceScore {
    double value = 0.0;  // in [0, 1]
    ConfidenceMethod method = ConfidenceMethod::overall;
    std::optional<std::size_t> token_count;
};

enum class CargMode { off, overall, answer_only, random };

std::string carg_mode_name(CargMode mode);
std::optional<CargMode> carg_mode_from_name(const std::string& name);

// exp(mean logprob) over every token of the reply.
// Throws LogprobsUnavailableError when the reply carries no logprobs.
ConfidenceScore confidence_overall(const ModelReply& reply);

// exp(mean logprob) over the tokens covering the final "The correct answer: X"
// span, excluding the reasoning trace. Token offsets come from concatenating
// the reply's tokens; a span token is any token overlapping the marker's
// character range (the shortest trailing window containing the marker).
// Throws LogprobsUnavailableError or AnswerSpanError.
ConfidenceScore confidence_answer_only(const ModelReply& reply);

// Seeded uniform confidence draws, default range [0.5, 1). State is owned by
// one evaluation worker per trajectory; draws are reproducible bit-exactly.
class RandomConfidenceSource {
public:
    explicit RandomConfidenceSource(std::uint64_t seed, double lo = 0.5, double hi = 1.0);
    ConfidenceScore next();

private:
    rng::SplitMix64 gen_;
    double lo_;
    double hi_;
};

// "[Confidence: NN.N%]" with one decimal place.
std::string format_confidence_annotation(double value);

// Returns a copy of the history where each assistant turn's content gets the
// annotation appended as a final line. `scores` must align one-to-one with
// the assistant turns; otherwise AlignmentError.
std::vector<ChatTurn> embed_confidence(const std::vector<ChatTurn>& history,
                                       const std::vector<ConfidenceScore>& scores);

// Removes a trailing annotation line if present (the exact inverse of
// embed_confidence on annotated content).
std::string strip_confidence_annotation(const std::string& content);
std::vector<ChatTurn> strip_confidence(const std::vector<ChatTurn>& history);

}  // namespace mtc
