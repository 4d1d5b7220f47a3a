#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mtc/classifiers.hpp"
#include "mtc/metrics.hpp"
#include "mtc/orchestrator.hpp"
#include "mtc/stats.hpp"

namespace mtc {

// Everything the emitters render. Every numeric cell is computed here (or in
// metrics/classifiers); the writers below only format.
struct ReportBundle {
    RunManifest manifest;
    PwcParams pwc_params;
    FatigueRule fatigue_rule;

    AccuracySummary accuracy;
    std::vector<double> pwc_scores;  // per gated question, file order
    double pwc_mean = 0.0;
    PatternCounts patterns;
    FailureCounts failures;
    std::map<AttackKind, FlipRate> flip_rates;
    std::optional<CalibrationReport> calib;
    std::string calib_unavailable_reason;

    struct GroupStat {
        std::string name;
        std::size_t n_questions = 0;
        std::size_t n_gated = 0;
        double acc_init = 0.0;
        double acc_avg = 0.0;
    };
    std::vector<GroupStat> by_difficulty;
    std::vector<GroupStat> by_cluster;
};

ReportBundle build_report(const RunManifest& manifest,
                          const std::vector<Trajectory>& trajectories, const PwcParams& params,
                          const FatigueRule& rule = {});

// Cross-table identities, re-derived from the raw trajectories: pattern
// counts partition the gated set, primary failure modes sum to the flipped
// total, fatigue matches its rule, per-round accuracy matches the vectors.
// Throws InvariantViolationError with the failing identity named.
void verify_report(const ReportBundle& bundle, const std::vector<Trajectory>& trajectories);

// Individual emitters (pure formatting).
std::string summary_csv(const ReportBundle& bundle);
std::string per_round_csv(const ReportBundle& bundle);
std::string patterns_csv(const ReportBundle& bundle);
std::string failures_csv(const ReportBundle& bundle);
std::string radar_csv(const ReportBundle& bundle);
std::string calibration_csv(const ReportBundle& bundle);
std::string terciles_csv(const ReportBundle& bundle);
std::string breakdown_csv(const std::vector<ReportBundle::GroupStat>& groups,
                          const std::string& key_header);
std::string report_markdown(const ReportBundle& bundle);
std::string report_json(const ReportBundle& bundle);

// Writes the full bundle into out_dir (created if needed):
// summary.csv, per_round.csv, patterns.csv, failures.csv, radar.csv,
// calibration.csv, terciles.csv, breakdown_difficulty.csv,
// breakdown_cluster.csv, report.md, report.json.
void write_report_files(const ReportBundle& bundle, const std::string& out_dir);

struct RunComparison {
    std::string label;
    stats::TestResult welch;  // base vs other per-question PWC
    std::size_t n_base = 0;
    std::size_t n_other = 0;
    double mean_delta = 0.0;  // other mean - base mean
};

RunComparison compare_pwc(const std::vector<double>& base_scores,
                          const std::vector<double>& other_scores, const std::string& label);

// comparison.csv: one row per compared run; with two or more comparisons a
// final one-sample t over the per-run mean deltas is appended.
std::string comparison_csv(const std::vector<RunComparison>& comparisons,
                           const std::optional<stats::TestResult>& delta_test);

}  // namespace mtc
