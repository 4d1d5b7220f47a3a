#include "mtc/reporting.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "mtc/errors.hpp"

namespace mtc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

// Percentages carry two decimals, PWC three; statistics four and p-values six.
std::string fmt_percent(double v) { return fmt("%.2f", v * 100.0); }
std::string fmt_pwc(double v) { return fmt("%.3f", v); }
std::string fmt_stat(double v) { return fmt("%.4f", v); }
std::string fmt_p(double v) { return fmt("%.6f", v); }

std::string pattern_csv_key(FlipPattern p) {
    switch (p) {
        case FlipPattern::NoFlip: return "no_flip";
        case FlipPattern::ImmediateRecovery: return "immediate_recovery";
        case FlipPattern::DelayedRecovery: return "delayed_recovery";
        case FlipPattern::DelayedSustained: return "delayed_sustained";
        case FlipPattern::Oscillating: return "oscillating";
        case FlipPattern::TerminalCapitulation: return "terminal_capitulation";
        case FlipPattern::DoubleFlip: return "double_flip";
    }
    return "?";
}

std::string failure_csv_key(FailureMode m) {
    switch (m) {
        case FailureMode::SelfDoubt: return "self_doubt";
        case FailureMode::SocialConformity: return "social_conformity";
        case FailureMode::SuggestionHijacking: return "suggestion_hijacking";
        case FailureMode::EmotionalSusceptibility: return "emotional_susceptibility";
    }
    return "?";
}

constexpr std::array<const char*, 3> kTercileNames = {"low", "medium", "high"};

}  // namespace

ReportBundle build_report(const RunManifest& manifest,
                          const std::vector<Trajectory>& trajectories, const PwcParams& params,
                          const FatigueRule& rule) {
    params.validate();
    ReportBundle bundle;
    bundle.manifest = manifest;
    bundle.pwc_params = params;
    bundle.fatigue_rule = rule;
    bundle.accuracy = accuracies(trajectories);
    bundle.pwc_scores = per_question_pwc(trajectories, params);
    bundle.pwc_mean = bundle.pwc_scores.empty()
                          ? 0.0
                          : stats::mean(bundle.pwc_scores);
    bundle.patterns = count_patterns(trajectories);
    bundle.failures = count_failures(trajectories, rule);
    bundle.flip_rates = per_attack_flip_rate(trajectories);
    try {
        bundle.calib = calibration(trajectories);
    } catch (const DegenerateSampleError& e) {
        bundle.calib_unavailable_reason = e.what();
    }

    auto group_stats = [&](auto key_of, auto names) {
        std::vector<ReportBundle::GroupStat> groups;
        for (const auto& [key, name] : names) {
            ReportBundle::GroupStat g;
            g.name = name;
            std::size_t initial_correct = 0;
            std::size_t round_correct = 0;
            for (const Trajectory& t : trajectories) {
                if (t.aborted || key_of(t) != key) continue;
                ++g.n_questions;
                if (t.initial_correct) ++initial_correct;
                if (!t.complete_gated()) continue;
                ++g.n_gated;
                for (const RoundRecord& r : t.rounds) {
                    if (r.correct) ++round_correct;
                }
            }
            if (g.n_questions == 0) continue;
            g.acc_init = static_cast<double>(initial_correct) / static_cast<double>(g.n_questions);
            g.acc_avg = g.n_gated == 0 ? 0.0
                                       : static_cast<double>(round_correct) /
                                             static_cast<double>(g.n_gated * 8);
            groups.push_back(std::move(g));
        }
        return groups;
    };

    std::vector<std::pair<Difficulty, std::string>> difficulties;
    for (Difficulty d : {Difficulty::elementary, Difficulty::high_school, Difficulty::college,
                         Difficulty::professional}) {
        difficulties.emplace_back(d, difficulty_name(d));
    }
    bundle.by_difficulty =
        group_stats([](const Trajectory& t) { return t.difficulty; }, difficulties);

    std::vector<std::pair<DomainCluster, std::string>> clusters;
    for (DomainCluster c : kAllClusters) clusters.emplace_back(c, cluster_name(c));
    bundle.by_cluster = group_stats([](const Trajectory& t) { return t.cluster; }, clusters);

    return bundle;
}

void verify_report(const ReportBundle& bundle, const std::vector<Trajectory>& trajectories) {
    // Pattern partition over the gated set.
    std::size_t pattern_sum =
        std::accumulate(bundle.patterns.by_pattern.begin(), bundle.patterns.by_pattern.end(),
                        std::size_t{0});
    if (pattern_sum != bundle.patterns.gated) {
        throw InvariantViolationError("pattern counts do not partition the gated set");
    }
    std::size_t flip_sum = pattern_sum - bundle.patterns.count(FlipPattern::NoFlip);
    if (flip_sum != bundle.patterns.total_flips()) {
        throw InvariantViolationError("flip-pattern counts do not sum to total flips");
    }

    // Four primary modes partition the flipped trajectories.
    if (bundle.failures.total() != bundle.patterns.total_flips()) {
        throw InvariantViolationError("failure modes do not sum to total flips");
    }
    std::size_t expected_fatigue = bundle.patterns.count(FlipPattern::Oscillating);
    if (bundle.fatigue_rule.include_terminal_capitulation) {
        expected_fatigue += bundle.patterns.count(FlipPattern::TerminalCapitulation);
    }
    if (bundle.failures.fatigue != expected_fatigue) {
        throw InvariantViolationError("fatigue count does not match its pattern rule");
    }

    // Per-round accuracy must match a direct recount over the vectors.
    std::array<std::size_t, 8> correct{};
    std::size_t gated = 0;
    for (const Trajectory& t : trajectories) {
        if (!t.complete_gated()) continue;
        ++gated;
        std::vector<bool> c = t.correctness_vector();
        for (std::size_t j = 1; j <= 8; ++j) {
            if (c[j]) ++correct[j - 1];
        }
    }
    if (gated != bundle.accuracy.n_gated) {
        throw InvariantViolationError("gated count does not match trajectories");
    }
    for (std::size_t j = 0; j < 8; ++j) {
        double expected = gated == 0 ? 0.0
                                     : static_cast<double>(correct[j]) / static_cast<double>(gated);
        if (expected != bundle.accuracy.per_round[j]) {
            throw InvariantViolationError("per-round accuracy inconsistent with vectors at round " +
                                          std::to_string(j + 1));
        }
    }
}

std::string summary_csv(const ReportBundle& bundle) {
    std::string out = "model,n_questions,n_gated,n_aborted,acc_init,acc_avg,pwc_mean,gamma,carg\n";
    out += bundle.manifest.model_id + ',' + std::to_string(bundle.accuracy.n_questions) + ',' +
           std::to_string(bundle.accuracy.n_gated) + ',' +
           std::to_string(bundle.accuracy.n_aborted) + ',' +
           fmt_percent(bundle.accuracy.acc_init) + ',' + fmt_percent(bundle.accuracy.acc_avg) +
           ',' + fmt_pwc(bundle.pwc_mean) + ',' + fmt("%.2f", bundle.pwc_params.gamma) + ',' +
           carg_mode_name(bundle.manifest.carg) + '\n';
    return out;
}

std::string per_round_csv(const ReportBundle& bundle) {
    std::string out = "model,r1,r2,r3,r4,r5,r6,r7,r8,avg\n";
    out += bundle.manifest.model_id;
    for (double acc : bundle.accuracy.per_round) out += ',' + fmt_percent(acc);
    out += ',' + fmt_percent(bundle.accuracy.acc_avg) + '\n';
    return out;
}

std::string patterns_csv(const ReportBundle& bundle) {
    std::string out = "model";
    for (FlipPattern p : kAllPatterns) out += ',' + pattern_csv_key(p);
    out += ",total_flips\n";
    out += bundle.manifest.model_id;
    for (FlipPattern p : kAllPatterns) out += ',' + std::to_string(bundle.patterns.count(p));
    out += ',' + std::to_string(bundle.patterns.total_flips()) + '\n';
    return out;
}

std::string failures_csv(const ReportBundle& bundle) {
    std::string out = "model";
    for (FailureMode m : kAllFailureModes) out += ',' + failure_csv_key(m);
    out += ",fatigue,total\n";
    out += bundle.manifest.model_id;
    for (FailureMode m : kAllFailureModes) out += ',' + std::to_string(bundle.failures.count(m));
    out += ',' + std::to_string(bundle.failures.fatigue) + ',' +
           std::to_string(bundle.failures.total()) + '\n';
    return out;
}

std::string radar_csv(const ReportBundle& bundle) {
    std::string out = "attack,flip_rate,flips,opportunities\n";
    for (AttackKind kind : kAllAttacks) {
        const FlipRate& fr = bundle.flip_rates.at(kind);
        out += attack_name(kind) + ',';
        if (fr.rate) out += fmt_percent(*fr.rate);
        out += ',' + std::to_string(fr.flips) + ',' + std::to_string(fr.opportunities) + '\n';
    }
    return out;
}

std::string calibration_csv(const ReportBundle& bundle) {
    std::string out = "metric,value\n";
    if (!bundle.calib) {
        out += "status,unavailable: " + bundle.calib_unavailable_reason + '\n';
        return out;
    }
    const CalibrationReport& c = *bundle.calib;
    out += "point_biserial_r," + fmt_stat(c.point_biserial_r) + '\n';
    out += "r_p_value," + fmt_p(c.r_p_value) + '\n';
    out += "roc_auc," + fmt_stat(c.roc_auc) + '\n';
    out += "mean_conf," + fmt_percent(c.mean_conf) + '\n';
    out += "sd_conf," + fmt_percent(c.sd_conf) + '\n';
    out += "n," + std::to_string(c.n) + '\n';
    out += "n_gated," + std::to_string(c.n_gated) + '\n';
    return out;
}

std::string terciles_csv(const ReportBundle& bundle) {
    std::string out = "tercile,flip_rate,flips,n\n";
    if (!bundle.calib) return out;
    for (std::size_t g = 0; g < 3; ++g) {
        const TercileRow& row = bundle.calib->terciles[g];
        out += std::string(kTercileNames[g]) + ',' + fmt_percent(row.rate) + ',' +
               std::to_string(row.flips) + ',' + std::to_string(row.n) + '\n';
    }
    return out;
}

std::string breakdown_csv(const std::vector<ReportBundle::GroupStat>& groups,
                          const std::string& key_header) {
    std::string out = key_header + ",n_questions,n_gated,acc_init,acc_avg\n";
    for (const ReportBundle::GroupStat& g : groups) {
        out += g.name + ',' + std::to_string(g.n_questions) + ',' + std::to_string(g.n_gated) +
               ',' + fmt_percent(g.acc_init) + ',' + fmt_percent(g.acc_avg) + '\n';
    }
    return out;
}

namespace {

std::string md_table(const std::string& csv) {
    // Renders a CSV block as a Markdown table (cells are known not to contain
    // commas).
    std::string out;
    std::size_t start = 0;
    bool header = true;
    while (start < csv.size()) {
        std::size_t end = csv.find('\n', start);
        if (end == std::string::npos) end = csv.size();
        std::string line = csv.substr(start, end - start);
        std::size_t columns = 1;
        std::string row = "| ";
        for (char ch : line) {
            if (ch == ',') {
                row += " | ";
                ++columns;
            } else {
                row += ch;
            }
        }
        row += " |\n";
        out += row;
        if (header) {
            out += "|";
            for (std::size_t i = 0; i < columns; ++i) out += " --- |";
            out += "\n";
            header = false;
        }
        start = end + 1;
    }
    return out;
}

}  // namespace

std::string report_markdown(const ReportBundle& bundle) {
    std::string out = "# Run report: " + bundle.manifest.model_id + "\n\n";
    out += "- seeds:";
    for (std::uint64_t s : bundle.manifest.seeds) out += ' ' + std::to_string(s);
    out += "\n- gamma: " + fmt("%.2f", bundle.pwc_params.gamma);
    out += "\n- carg: " + carg_mode_name(bundle.manifest.carg);
    out += "\n- template_hash: " + bundle.manifest.template_hash;
    out += "\n- prompt_hash: " + bundle.manifest.prompt_hash;
    out += "\n- aborted trajectories (dropped from all aggregates): " +
           std::to_string(bundle.accuracy.n_aborted);
    out += "\n\n## Summary\n\n" + md_table(summary_csv(bundle));
    out += "\n## Round-by-round accuracy\n\n" + md_table(per_round_csv(bundle));
    out += "\n## Flip patterns\n\n" + md_table(patterns_csv(bundle));
    out += "\n## Failure modes\n\n" + md_table(failures_csv(bundle));
    out += "\n## Per-attack flip rates\n\n" + md_table(radar_csv(bundle));
    out += "\n## Calibration\n\n" + md_table(calibration_csv(bundle));
    if (bundle.calib) out += "\n" + md_table(terciles_csv(bundle));
    out += "\n## Accuracy by difficulty\n\n" +
           md_table(breakdown_csv(bundle.by_difficulty, "difficulty"));
    out += "\n## Accuracy by domain cluster\n\n" +
           md_table(breakdown_csv(bundle.by_cluster, "cluster"));
    return out;
}

std::string report_json(const ReportBundle& bundle) {
    json j;
    j["schema_version"] = 1;
    j["manifest"] = json::parse(serialize_manifest(bundle.manifest));
    j["gamma"] = bundle.pwc_params.gamma;
    j["include_round_zero"] = bundle.pwc_params.include_round_zero;
    j["fatigue_includes_terminal_capitulation"] =
        bundle.fatigue_rule.include_terminal_capitulation;

    j["summary"] = {{"n_questions", bundle.accuracy.n_questions},
                    {"n_gated", bundle.accuracy.n_gated},
                    {"n_aborted", bundle.accuracy.n_aborted},
                    {"acc_init", bundle.accuracy.acc_init},
                    {"acc_avg", bundle.accuracy.acc_avg},
                    {"pwc_mean", bundle.pwc_mean}};
    json per_round = json::array();
    for (double acc : bundle.accuracy.per_round) per_round.push_back(acc);
    j["per_round_accuracy"] = per_round;

    json patterns;
    for (FlipPattern p : kAllPatterns) patterns[pattern_csv_key(p)] = bundle.patterns.count(p);
    patterns["total_flips"] = bundle.patterns.total_flips();
    j["patterns"] = patterns;

    json failures;
    for (FailureMode m : kAllFailureModes) failures[failure_csv_key(m)] = bundle.failures.count(m);
    failures["fatigue"] = bundle.failures.fatigue;
    failures["total"] = bundle.failures.total();
    j["failures"] = failures;

    json radar;
    for (AttackKind kind : kAllAttacks) {
        const FlipRate& fr = bundle.flip_rates.at(kind);
        json entry = {{"flips", fr.flips}, {"opportunities", fr.opportunities}};
        if (fr.rate) entry["rate"] = *fr.rate;
        radar[attack_name(kind)] = entry;
    }
    j["per_attack_flip_rate"] = radar;

    if (bundle.calib) {
        const CalibrationReport& c = *bundle.calib;
        json terciles = json::array();
        for (std::size_t g = 0; g < 3; ++g) {
            terciles.push_back({{"group", kTercileNames[g]},
                                {"rate", c.terciles[g].rate},
                                {"flips", c.terciles[g].flips},
                                {"n", c.terciles[g].n}});
        }
        j["calibration"] = {{"point_biserial_r", c.point_biserial_r},
                            {"r_p_value", c.r_p_value},
                            {"roc_auc", c.roc_auc},
                            {"mean_conf", c.mean_conf},
                            {"sd_conf", c.sd_conf},
                            {"n", c.n},
                            {"n_gated", c.n_gated},
                            {"terciles", terciles}};
    } else {
        j["calibration"] = {{"status", "unavailable"},
                            {"reason", bundle.calib_unavailable_reason}};
    }

    auto groups_json = [](const std::vector<ReportBundle::GroupStat>& groups) {
        json arr = json::array();
        for (const auto& g : groups) {
            arr.push_back({{"name", g.name},
                           {"n_questions", g.n_questions},
                           {"n_gated", g.n_gated},
                           {"acc_init", g.acc_init},
                           {"acc_avg", g.acc_avg}});
        }
        return arr;
    };
    j["by_difficulty"] = groups_json(bundle.by_difficulty);
    j["by_cluster"] = groups_json(bundle.by_cluster);
    return j.dump(2) + "\n";
}

void write_report_files(const ReportBundle& bundle, const std::string& out_dir) {
    fs::create_directories(out_dir);
    auto write = [&](const char* name, const std::string& content) {
        std::ofstream out(fs::path(out_dir) / name, std::ios::trunc);
        if (!out) throw FileFormatError(std::string("cannot write report file ") + name);
        out << content;
    };
    write("summary.csv", summary_csv(bundle));
    write("per_round.csv", per_round_csv(bundle));
    write("patterns.csv", patterns_csv(bundle));
    write("failures.csv", failures_csv(bundle));
    write("radar.csv", radar_csv(bundle));
    write("calibration.csv", calibration_csv(bundle));
    write("terciles.csv", terciles_csv(bundle));
    write("breakdown_difficulty.csv", breakdown_csv(bundle.by_difficulty, "difficulty"));
    write("breakdown_cluster.csv", breakdown_csv(bundle.by_cluster, "cluster"));
    write("report.md", report_markdown(bundle));
    write("report.json", report_json(bundle));
}

RunComparison compare_pwc(const std::vector<double>& base_scores,
                          const std::vector<double>& other_scores, const std::string& label) {
    RunComparison comparison;
    comparison.label = label;
    comparison.welch = stats::welch_t(other_scores, base_scores);
    comparison.n_base = base_scores.size();
    comparison.n_other = other_scores.size();
    comparison.mean_delta = stats::mean(other_scores) - stats::mean(base_scores);
    return comparison;
}

std::string comparison_csv(const std::vector<RunComparison>& comparisons,
                           const std::optional<stats::TestResult>& delta_test) {
    std::string out = "comparison,welch_t,df,p_value,cohens_d,mean_delta,n_base,n_other\n";
    for (const RunComparison& c : comparisons) {
        out += c.label + ',' + fmt_stat(c.welch.statistic) + ',' +
               fmt("%.3f", c.welch.degrees_of_freedom) + ',' + fmt_p(c.welch.p_value) + ',' +
               fmt_stat(c.welch.effect_size.value_or(0.0)) + ',' + fmt_stat(c.mean_delta) + ',' +
               std::to_string(c.n_base) + ',' + std::to_string(c.n_other) + '\n';
    }
    if (delta_test) {
        out += "one_sample_delta," + fmt_stat(delta_test->statistic) + ',' +
               fmt("%.3f", delta_test->degrees_of_freedom) + ',' + fmt_p(delta_test->p_value) +
               ',' + fmt_stat(delta_test->effect_size.value_or(0.0)) + ",,," + '\n';
    }
    return out;
}

}  // namespace mtc
