#include "mtc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mtc/errors.hpp"

namespace mtc {

void PwcParams::validate() const {
    if (!(gamma > 0.0 && gamma < 0.5)) {
        throw ConfigError("pwc: gamma must be in (0, 0.5)");
    }
}

double pwc(const std::vector<bool>& correctness, const PwcParams& params) {
    params.validate();
    if (correctness.empty()) throw DegenerateSampleError("pwc: empty correctness vector");

    std::size_t start = params.include_round_zero ? 0 : 1;
    if (start >= correctness.size()) {
        throw DegenerateSampleError("pwc: no rounds left after dropping round 0");
    }
    double score = 0.0;
    double weight = 1.0;
    for (std::size_t i = start; i < correctness.size(); ++i) {
        if (correctness[i]) score += weight;
        weight *= params.gamma;
    }
    return score;
}

AccuracySummary accuracies(const std::vector<Trajectory>& trajectories) {
    AccuracySummary summary;
    std::array<std::size_t, 8> round_correct{};
    std::size_t initial_correct = 0;

    for (const Trajectory& t : trajectories) {
        if (t.aborted) {
            ++summary.n_aborted;
            continue;
        }
        ++summary.n_questions;
        if (t.initial_correct) ++initial_correct;
        if (!t.complete_gated()) continue;
        ++summary.n_gated;
        for (std::size_t j = 0; j < 8; ++j) {
            if (t.rounds[j].correct) ++round_correct[j];
        }
    }
    if (summary.n_questions == 0) throw DegenerateSampleError("accuracies: empty run");

    summary.acc_init =
        static_cast<double>(initial_correct) / static_cast<double>(summary.n_questions);
    std::size_t total_correct = 0;
    for (std::size_t j = 0; j < 8; ++j) {
        summary.per_round[j] = summary.n_gated == 0
                                   ? 0.0
                                   : static_cast<double>(round_correct[j]) /
                                         static_cast<double>(summary.n_gated);
        total_correct += round_correct[j];
    }
    summary.acc_avg = summary.n_gated == 0
                          ? 0.0
                          : static_cast<double>(total_correct) /
                                static_cast<double>(summary.n_gated * 8);
    return summary;
}

std::map<AttackKind, FlipRate> per_attack_flip_rate(const std::vector<Trajectory>& trajectories) {
    std::map<AttackKind, FlipRate> rates;
    for (AttackKind kind : kAllAttacks) rates[kind] = FlipRate{};

    for (const Trajectory& t : trajectories) {
        if (!t.complete_gated()) continue;
        std::vector<bool> c = t.correctness_vector();
        for (std::size_t j = 1; j <= 8; ++j) {
            if (!c[j - 1]) continue;  // only rounds entered in a correct state count
            FlipRate& fr = rates[t.rounds[j - 1].attack];
            ++fr.opportunities;
            if (!c[j]) ++fr.flips;
        }
    }
    for (auto& [kind, fr] : rates) {
        if (fr.opportunities > 0) {
            fr.rate = static_cast<double>(fr.flips) / static_cast<double>(fr.opportunities);
        }
    }
    return rates;
}

std::vector<double> per_question_pwc(const std::vector<Trajectory>& trajectories,
                                     const PwcParams& params) {
    params.validate();
    std::vector<double> scores;
    for (const Trajectory& t : trajectories) {
        if (!t.complete_gated()) continue;
        scores.push_back(pwc(t.correctness_vector(), params));
    }
    return scores;
}

std::array<TercileRow, 3> tercileflip_rates_impl(const std::vector<double>& conf,
                                                 const std::vector<bool>& flipped) {
    std::size_t n = conf.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return conf[i] < conf[j]; });

    std::array<std::size_t, 4> bounds = {0, n / 3, 2 * n / 3, n};
    std::array<TercileRow, 3> rows{};
    for (std::size_t g = 0; g < 3; ++g) {
        TercileRow& row = rows[g];
        row.n = bounds[g + 1] - bounds[g];
        for (std::size_t k = bounds[g]; k < bounds[g + 1]; ++k) {
            if (flipped[order[k]]) ++row.flips;
        }
        row.rate = row.n == 0 ? 0.0 : static_cast<double>(row.flips) / static_cast<double>(row.n);
    }
    return rows;
}

std::array<TercileRow, 3> tercile_flip_rates(const std::vector<double>& per_question_conf,
                                             const std::vector<bool>& flipped) {
    if (per_question_conf.size() != flipped.size()) {
        throw DegenerateSampleError("tercile_flip_rates: length mismatch");
    }
    if (per_question_conf.size() < 3) {
        throw DegenerateSampleError("tercile_flip_rates: need at least 3 samples");
    }
    return tercileflip_rates_impl(per_question_conf, flipped);
}

CalibrationReport calibration(const std::vector<Trajectory>& trajectories) {
    std::vector<double> conf;
    std::vector<bool> correct;
    std::vector<double> gated_conf;
    std::vector<bool> gated_flipped;

    for (const Trajectory& t : trajectories) {
        if (t.aborted) continue;
        double sum = 0.0;
        std::size_t count = 0;
        if (t.initial_confidence) {
            sum += t.initial_confidence->value;
            ++count;
        }
        for (const RoundRecord& r : t.rounds) {
            if (r.confidence) {
                sum += r.confidence->value;
                ++count;
            }
        }
        if (count == 0) continue;
        double avg = sum / static_cast<double>(count);
        conf.push_back(avg);
        correct.push_back(t.initial_correct);
        if (t.complete_gated()) {
            bool flipped = false;
            for (const RoundRecord& r : t.rounds) flipped = flipped || !r.correct;
            gated_conf.push_back(avg);
            gated_flipped.push_back(flipped);
        }
    }

    CalibrationReport report;
    report.n = conf.size();
    report.n_gated = gated_conf.size();
    if (conf.size() < 3) {
        throw DegenerateSampleError("calibration: need at least 3 questions with confidence");
    }
    stats::Correlation pb = stats::point_biserial(correct, conf);
    report.point_biserial_r = pb.r;
    report.r_p_value = pb.p_value;
    report.roc_auc = stats::roc_auc(correct, conf);
    report.mean_conf = stats::mean(conf);
    report.sd_conf = std::sqrt(stats::sample_variance(conf));
    report.terciles = tercile_flip_rates(gated_conf, gated_flipped);
    return report;
}

}  // namespace mtc
