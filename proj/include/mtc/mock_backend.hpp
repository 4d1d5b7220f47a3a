#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "mtc/attack_engine.hpp"
#include "mtc/model_backend.hpp"
#include "mtc/question_bank.hpp"

namespace mtc {

// Scripted behavior for the offline mock: a stand-in for a hosted chat model
// with controllable flip dynamics. All decisions are derived by hashing the
// conversation content against `seed`, so a reply is a pure function of
// (profile, conversation).
struct BehaviorProfile {
    std::string profile_id = "mock";
    double initial_correct_prob = 1.0;
    std::map<AttackKind, double> flip_prob;  // absent kind = 0.0
    double recovery_prob = 0.0;
    double logprob_correct = -0.05129329438755058;  // ln(0.95)
    double logprob_flipped = -0.5108256237659907;   // ln(0.60)
    double logprob_filler = -1.2;
    bool emit_logprobs = true;
    std::uint64_t seed = 0;

    void validate() const;  // throws ConfigError on out-of-range fields
};

// JSONL profile file, one profile object per line.
std::vector<BehaviorProfile> load_profiles(const std::string& path);
BehaviorProfile parse_profile_record(const std::string& line, std::size_t line_no);
std::string serialize_profile(const BehaviorProfile& profile);

// Deterministic scripted chat model. Resolves the question from the first
// line of the first user turn, recognizes follow-up attacks by matching them
// against the rendered templates, and walks a correct/incorrect state machine
// driven by the profile's probabilities. Replies always end in the structured
// "The correct answer: X" form and carry synthetic token logprobs
// (answer-span tokens at the correct/flipped level, remaining tokens at the
// filler level).
class MockBackend : public Backend {
public:
    MockBackend(BehaviorProfile profile, const std::vector<Question>& bank,
                AttackTemplates templates = AttackTemplates::builtin(),
                DistractorRender render = DistractorRender::label_only);

    ModelReply send(const std::vector<ChatTurn>& conversation,
                    const RequestOptions& options) override;
    std::string id() const override { return "mock:" + profile_.profile_id; }
    bool supports_logprobs() const override { return profile_.emit_logprobs; }

    // Substring-faithful synthetic tokenization: non-space runs with their
    // leading whitespace attached; concatenation reproduces the text exactly.
    static std::vector<std::string> tokenize(const std::string& text);

private:
    struct ParsedAttack {
        AttackKind kind;
        std::optional<AnswerLabel> distractor;
    };

    const Question& resolve_question(const std::vector<ChatTurn>& conversation) const;
    ParsedAttack match_attack(const std::string& content) const;
    double draw(const std::vector<ChatTurn>& conversation, const char* tag) const;
    ModelReply compose_reply(const Question& question, AnswerLabel answer) const;

    BehaviorProfile profile_;
    std::unordered_map<std::string, Question> by_first_line_;
    AttackTemplates templates_;
    DistractorRender render_;
};

}  // namespace mtc
