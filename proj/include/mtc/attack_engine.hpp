#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mtc/question_bank.hpp"

namespace mtc {

// The eight adversarial follow-up types, in canonical order.
enum class AttackKind { A1, A2, A3, A4, A5, A6, A7, A8 };

constexpr std::array<AttackKind, 8> kAllAttacks = {
    AttackKind::A1, AttackKind::A2, AttackKind::A3, AttackKind::A4,
    AttackKind::A5, AttackKind::A6, AttackKind::A7, AttackKind::A8,
};

std::string attack_name(AttackKind kind);  // "A1" .. "A8"
std::optional<AttackKind> attack_from_name(const std::string& name);
std::string attack_description(AttackKind kind);  // "ClosedEnded" .. "FalseAgreement"

// A3 (Misleading) and A8 (FalseAgreement) substitute an incorrect
// alternative answer into the template.
bool needs_distractor(AttackKind kind);

enum class DistractorMode { first_incorrect, seeded_uniform };

std::string distractor_mode_name(DistractorMode mode);
std::optional<DistractorMode> distractor_mode_from_name(const std::string& name);

// How the distractor renders into the template: the bare label ("B") or
// label plus option text ("B. Liver").
enum class DistractorRender { label_only, label_and_text };

struct AttackSchedule {
    std::string question_id;
    std::uint64_t seed = 0;
    std::array<AttackKind, 8> order;  // a permutation of all eight kinds
};

// Follow-up message templates. "{answer}" marks the distractor slot in the
// A3/A8 texts. Defaults are compiled in; load_templates() accepts an override
// file (JSON object {"A1": "...", ..., "A8": "..."}), which changes the
// protocol hash recorded in run manifests.
class AttackTemplates {
public:
    static AttackTemplates builtin();
    static AttackTemplates load(const std::string& path);

    const std::string& raw_template(AttackKind kind) const;

    // Renders the follow-up message. `distractor` must be supplied iff the
    // kind needs one; `option_text` is used only for label_and_text render.
    std::string render(AttackKind kind, std::optional<AnswerLabel> distractor = std::nullopt,
                       DistractorRender render = DistractorRender::label_only,
                       const std::string& option_text = "") const;

    // FNV-1a over the template texts plus the render style; identifies the
    // protocol version in manifests and reports.
    std::string protocol_hash(DistractorRender render) const;

private:
    std::array<std::string, 8> texts_;
};

// Picks an incorrect alternative answer for a question. first_incorrect walks
// labels in A<B<C<D order; seeded_uniform draws from the three incorrect
// labels via SplitMix64 keyed on (question id, seed). Never returns the
// correct label.
AnswerLabel select_distractor(const Question& question, DistractorMode mode, std::uint64_t seed);

// Seeded uniform permutation of the eight attack kinds. The generator is
// SplitMix64 seeded with mix64(fnv1a64(question_id) ^ mix64(seed)); the
// shuffle is Fisher-Yates descending with modulo index draws. Identical
// inputs reproduce identical output on every platform.
AttackSchedule make_schedule(const std::string& question_id, std::uint64_t seed);

}  // namespace mtc
