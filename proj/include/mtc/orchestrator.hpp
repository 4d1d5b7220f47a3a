#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mtc/attack_engine.hpp"
#include "mtc/confidence.hpp"
#include "mtc/model_backend.hpp"
#include "mtc/question_bank.hpp"

namespace mtc {

struct RoundRecord {
    int round_index = 0;  // 1..8
    AttackKind attack = AttackKind::A1;
    std::string rendered_attack;
    std::string reply_text;
    std::optional<AnswerLabel> parsed;  // nullopt = unparseable, scored incorrect
    bool correct = false;
    std::optional<ConfidenceScore> confidence;
};

struct Trajectory {
    std::string question_id;
    std::string model_id;
    std::uint64_t seed = 0;
    std::string subject;  // denormalized so analysis never needs the bank
    Difficulty difficulty = Difficulty::elementary;
    DomainCluster cluster = DomainCluster::GeneralKnowledge;
    AttackSchedule schedule;
    std::optional<AnswerLabel> distractor;  // M_A shared by A3 and A8
    std::string initial_reply;
    std::optional<AnswerLabel> initial_parsed;
    bool initial_correct = false;
    std::optional<ConfidenceScore> initial_confidence;
    std::vector<RoundRecord> rounds;  // empty when gated out
    bool aborted = false;
    std::optional<int> aborted_at_round;  // 0 = initial request
    std::string abort_reason;

    // True when the trajectory passed the gate and completed all 8 rounds.
    bool complete_gated() const { return initial_correct && !aborted && rounds.size() == 8; }

    // c_0..c_8; only defined for complete gated trajectories.
    std::vector<bool> correctness_vector() const;
};

struct RunConfig {
    std::string model_id;
    std::vector<std::uint64_t> seeds;
    double gamma = 0.45;
    CargMode carg = CargMode::off;
    DistractorMode distractor_mode = DistractorMode::first_incorrect;
    DistractorRender distractor_render = DistractorRender::label_only;
    double random_conf_lo = 0.5;  // CARG random elicitation range
    double random_conf_hi = 1.0;
    int concurrency = 1;
    RequestOptions request;
    std::string output_dir;
    std::size_t limit = 0;  // stop after N new trajectories; 0 = no limit

    void validate() const;  // throws ConfigError
};

// Fixed instruction appended to every question prompt; its text is part of
// the protocol and is folded into the manifest's prompt hash.
std::string initial_prompt(const Question& question);
std::string prompt_format_hash();

// Runs the full per-question protocol: initial answer, correctness gate, and
// eight adversarial rounds in the seeded order, annotating history with
// confidence scores first when CARG is active. Backend failures (after the
// backend's own retries) yield a trajectory marked aborted at the failing
// round rather than an exception.
Trajectory evaluate_question(const Question& question, Backend& backend,
                             const AttackTemplates& templates, const RunConfig& config,
                             std::uint64_t seed);

struct RunManifest {
    int schema_version = 1;
    std::string model_id;
    std::vector<std::uint64_t> seeds;
    double gamma = 0.45;
    CargMode carg = CargMode::off;
    DistractorMode distractor_mode = DistractorMode::first_incorrect;
    DistractorRender distractor_render = DistractorRender::label_only;
    double random_conf_lo = 0.5;
    double random_conf_hi = 1.0;
    std::string template_hash;
    std::string prompt_hash;
    std::size_t question_count = 0;
    std::size_t expected_trajectories = 0;
    std::size_t completed_trajectories = 0;  // persisted, not aborted
    std::size_t aborted_trajectories = 0;
    bool complete = false;
    std::string started_at;   // timestamps live here only, never in records
    std::string finished_at;
    std::string first_error;  // failure summary for partial runs
};

struct RunResult {
    RunManifest manifest;
    std::size_t evaluated = 0;  // new this invocation
    std::size_t skipped = 0;    // resumed from disk
};

// Evaluates every (question, seed) pair, persisting each trajectory in
// deterministic task order as it completes. Re-running over an existing
// directory skips pairs that already have a non-aborted record.
RunResult run_suite(const std::vector<Question>& bank, Backend& backend,
                    const AttackTemplates& templates, const RunConfig& config);

}  // namespace mtc
