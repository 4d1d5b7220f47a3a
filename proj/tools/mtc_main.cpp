// mtc: batch harness for multi-turn consistency evaluation of chat models
// under scripted adversarial follow-ups.
//
// Subcommands: run, analyze, radar, validate-bank.
// Exit codes: 0 success, 1 usage/config error, 2 partial run, 3 invariant
// violation at report time.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "mtc/errors.hpp"
#include "mtc/http_backend.hpp"
#include "mtc/metrics.hpp"
#include "mtc/mock_backend.hpp"
#include "mtc/orchestrator.hpp"
#include "mtc/reporting.hpp"
#include "mtc/trajectory_store.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;
constexpr int kExitInvariant = 3;

struct RunArgs {
    std::string bank_path;
    std::string output_dir;
    std::string backend = "mock";
    std::string model_id;
    std::string mock_profile_path;
    std::string profile_id;
    std::string base_url;
    std::string templates_path;
    std::vector<std::uint64_t> seeds = {1, 1000, 2026};
    double gamma = 0.45;
    std::string carg = "off";
    std::string distractor_mode = "first_incorrect";
    std::string distractor_render = "label_only";
    double random_lo = 0.5;
    double random_hi = 1.0;
    int concurrency = 1;
    std::size_t limit = 0;
    long timeout_s = 120;
    int max_retries = 3;
};

mtc::BehaviorProfile pick_profile(const RunArgs& args) {
    if (args.mock_profile_path.empty()) return mtc::BehaviorProfile{};
    auto profiles = mtc::load_profiles(args.mock_profile_path);
    if (args.profile_id.empty()) return profiles.front();
    for (const auto& profile : profiles) {
        if (profile.profile_id == args.profile_id) return profile;
    }
    throw mtc::ConfigError("profile id \"" + args.profile_id + "\" not found in " +
                           args.mock_profile_path);
}

int cmd_run(const RunArgs& args) {
    mtc::RunConfig config;
    config.seeds = args.seeds;
    config.gamma = args.gamma;
    auto carg = mtc::carg_mode_from_name(args.carg);
    if (!carg) throw mtc::ConfigError("unknown carg mode: " + args.carg);
    config.carg = *carg;
    auto mode = mtc::distractor_mode_from_name(args.distractor_mode);
    if (!mode) throw mtc::ConfigError("unknown distractor mode: " + args.distractor_mode);
    config.distractor_mode = *mode;
    if (args.distractor_render == "label_only") {
        config.distractor_render = mtc::DistractorRender::label_only;
    } else if (args.distractor_render == "label_and_text") {
        config.distractor_render = mtc::DistractorRender::label_and_text;
    } else {
        throw mtc::ConfigError("unknown distractor render: " + args.distractor_render);
    }
    config.random_conf_lo = args.random_lo;
    config.random_conf_hi = args.random_hi;
    config.concurrency = args.concurrency;
    config.limit = args.limit;
    config.output_dir = args.output_dir;
    config.request.timeout = std::chrono::seconds(args.timeout_s);
    config.request.max_retries = args.max_retries;
    config.validate();

    auto bank = mtc::load_questions(args.bank_path);
    auto templates = args.templates_path.empty() ? mtc::AttackTemplates::builtin()
                                                 : mtc::AttackTemplates::load(args.templates_path);

    std::unique_ptr<mtc::Backend> backend;
    if (args.backend == "mock") {
        backend = std::make_unique<mtc::MockBackend>(pick_profile(args), bank, templates,
                                                     config.distractor_render);
    } else if (args.backend == "live") {
        if (args.model_id.empty()) throw mtc::ConfigError("live backend requires --model-id");
        // Fail fast on missing credentials, before any request is attempted.
        mtc::HttpBackendConfig http = mtc::http_config_from_env(args.model_id);
        if (!args.base_url.empty()) http.base_url = args.base_url;
        http.max_concurrent_requests = args.concurrency;
        backend = std::make_unique<mtc::HttpBackend>(http);
    } else {
        throw mtc::ConfigError("unknown backend: " + args.backend + " (use mock or live)");
    }
    config.model_id = args.model_id.empty() ? backend->id() : args.model_id;

    mtc::RunResult result = mtc::run_suite(bank, *backend, templates, config);
    std::cout << "run complete=" << (result.manifest.complete ? "true" : "false")
              << " evaluated=" << result.evaluated << " resumed_skip=" << result.skipped
              << " completed=" << result.manifest.completed_trajectories << "/"
              << result.manifest.expected_trajectories
              << " aborted=" << result.manifest.aborted_trajectories << "\n";
    if (!result.manifest.first_error.empty()) {
        std::cout << "first error: " << result.manifest.first_error << "\n";
    }
    return result.manifest.complete ? kExitOk : kExitPartial;
}

struct LoadedRun {
    mtc::RunManifest manifest;
    std::vector<mtc::Trajectory> trajectories;
};

LoadedRun load_run(const std::string& run_dir, bool accept_partial) {
    mtc::TrajectoryStore store(run_dir);
    auto manifest = store.load_manifest();
    if (!manifest) throw mtc::ConfigError("no manifest.json in " + run_dir);
    if (!manifest->complete && !accept_partial) {
        throw mtc::ConfigError("run " + run_dir +
                               " is incomplete; pass --accept-partial to analyze anyway");
    }
    LoadedRun run{*manifest, store.load_trajectories()};
    if (run.trajectories.empty()) throw mtc::ConfigError("run " + run_dir + " has no trajectories");
    return run;
}

int cmd_analyze(const std::string& run_dir, const std::string& out_dir,
                const std::vector<std::string>& compare_dirs, bool accept_partial,
                bool fatigue_terminal) {
    LoadedRun run = load_run(run_dir, accept_partial);
    mtc::PwcParams params{run.manifest.gamma, true};
    mtc::FatigueRule rule{fatigue_terminal};

    mtc::ReportBundle bundle = mtc::build_report(run.manifest, run.trajectories, params, rule);
    mtc::verify_report(bundle, run.trajectories);

    std::string target = out_dir.empty() ? (fs::path(run_dir) / "report").string() : out_dir;
    mtc::write_report_files(bundle, target);

    if (!compare_dirs.empty()) {
        std::vector<mtc::RunComparison> comparisons;
        std::vector<double> mean_deltas;
        for (const std::string& dir : compare_dirs) {
            LoadedRun other = load_run(dir, accept_partial);
            auto other_scores = mtc::per_question_pwc(other.trajectories, params);
            auto comparison = mtc::compare_pwc(bundle.pwc_scores, other_scores,
                                               fs::path(dir).filename().string());
            mean_deltas.push_back(comparison.mean_delta);
            comparisons.push_back(std::move(comparison));
        }
        std::optional<mtc::stats::TestResult> delta_test;
        if (mean_deltas.size() >= 2) {
            delta_test = mtc::stats::one_sample_t(mean_deltas, 0.0);
        }
        std::ofstream out(fs::path(target) / "comparison.csv", std::ios::trunc);
        out << mtc::comparison_csv(comparisons, delta_test);
    }

    std::cout << "report written to " << target << "\n";
    return kExitOk;
}

int cmd_radar(const std::string& run_dir, const std::string& out_path, bool accept_partial) {
    LoadedRun run = load_run(run_dir, accept_partial);
    mtc::PwcParams params{run.manifest.gamma, true};
    mtc::ReportBundle bundle = mtc::build_report(run.manifest, run.trajectories, params);
    mtc::verify_report(bundle, run.trajectories);

    std::string csv = mtc::radar_csv(bundle);
    std::string target = out_path.empty() ? (fs::path(run_dir) / "radar.csv").string() : out_path;
    std::ofstream out(target, std::ios::trunc);
    if (!out) throw mtc::ConfigError("cannot write " + target);
    out << csv;
    std::cout << csv;
    return kExitOk;
}

int cmd_validate_bank(const std::string& bank_path) {
    auto bank = mtc::load_questions(bank_path);
    std::map<mtc::DomainCluster, std::size_t> per_cluster;
    for (const auto& q : bank) ++per_cluster[q.cluster];
    std::cout << "bank ok: " << bank.size() << " questions\n";
    for (const auto& [cluster, n] : per_cluster) {
        std::cout << "  " << mtc::cluster_name(cluster) << ": " << n << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-turn consistency harness for chat models"};
    app.require_subcommand(1);

    RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "Evaluate a question bank against a backend");
    run->add_option("--bank", run_args.bank_path, "Question bank (JSONL)")->required();
    run->add_option("--out", run_args.output_dir, "Run output directory")->required();
    run->add_option("--backend", run_args.backend, "Backend: mock or live")
        ->check(CLI::IsMember({"mock", "live"}));
    run->add_option("--model-id", run_args.model_id, "Model identifier (live) or override label");
    run->add_option("--mock-profile", run_args.mock_profile_path, "Mock profile file (JSONL)");
    run->add_option("--profile-id", run_args.profile_id, "Profile id within the profile file");
    run->add_option("--base-url", run_args.base_url, "Override MTC_BASE_URL for live runs");
    run->add_option("--templates", run_args.templates_path, "Override attack template file");
    run->add_option("--seeds", run_args.seeds, "Seeds (default 1 1000 2026)")->delimiter(',');
    run->add_option("--gamma", run_args.gamma, "PWC discount, in (0, 0.5)");
    run->add_option("--carg", run_args.carg, "CARG mode: off|overall|answer_only|random")
        ->check(CLI::IsMember({"off", "overall", "answer_only", "random"}));
    run->add_option("--distractor-mode", run_args.distractor_mode,
                    "first_incorrect or seeded_uniform");
    run->add_option("--distractor-render", run_args.distractor_render,
                    "label_only or label_and_text");
    run->add_option("--random-conf-lo", run_args.random_lo, "Random confidence lower bound");
    run->add_option("--random-conf-hi", run_args.random_hi, "Random confidence upper bound");
    run->add_option("--concurrency", run_args.concurrency, "Concurrent question evaluations");
    run->add_option("--limit", run_args.limit, "Stop after N new trajectories (0 = all)");
    run->add_option("--timeout", run_args.timeout_s, "Request timeout in seconds");
    run->add_option("--max-retries", run_args.max_retries, "Retries per request");

    std::string analyze_dir, analyze_out;
    std::vector<std::string> compare_dirs;
    bool accept_partial = false;
    bool fatigue_terminal = false;
    CLI::App* analyze = app.add_subcommand("analyze", "Emit report tables for a stored run");
    analyze->add_option("run_dir", analyze_dir, "Run directory")->required();
    analyze->add_option("--out", analyze_out, "Report output directory (default RUN/report)");
    analyze->add_option("--compare", compare_dirs,
                        "Other run directories to compare per-question PWC against");
    analyze->add_flag("--accept-partial", accept_partial, "Analyze an incomplete run");
    analyze->add_flag("--fatigue-includes-terminal", fatigue_terminal,
                      "Count TerminalCapitulation toward Fatigue");

    std::string radar_dir, radar_out;
    bool radar_partial = false;
    CLI::App* radar = app.add_subcommand("radar", "Emit per-attack flip-rate CSV");
    radar->add_option("run_dir", radar_dir, "Run directory")->required();
    radar->add_option("--out", radar_out, "Output CSV path (default RUN/radar.csv)");
    radar->add_flag("--accept-partial", radar_partial, "Use an incomplete run");

    std::string validate_path;
    CLI::App* validate = app.add_subcommand("validate-bank", "Check a question bank file");
    validate->add_option("bank", validate_path, "Question bank (JSONL)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run->parsed()) return cmd_run(run_args);
        if (analyze->parsed()) {
            return cmd_analyze(analyze_dir, analyze_out, compare_dirs, accept_partial,
                               fatigue_terminal);
        }
        if (radar->parsed()) return cmd_radar(radar_dir, radar_out, radar_partial);
        if (validate->parsed()) return cmd_validate_bank(validate_path);
    } catch (const mtc::InvariantViolationError& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const mtc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
