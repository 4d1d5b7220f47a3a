#include "mtc/trajectory_store.hpp"

#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "mtc/errors.hpp"

namespace mtc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json confidence_to_json(const ConfidenceScore& score) {
    json j;
    j["method"] = confidence_method_name(score.method);
    j["value"] = score.value;
    if (score.token_count) j["token_count"] = *score.token_count;
    return j;
}

ConfidenceScore confidence_from_json(const json& j) {
    ConfidenceScore score;
    auto method = confidence_method_from_name(j.at("method").get<std::string>());
    if (!method) throw FileFormatError("unknown confidence method");
    score.method = *method;
    score.value = j.at("value").get<double>();
    if (j.contains("token_count")) score.token_count = j["token_count"].get<std::size_t>();
    return score;
}

std::string label_string(AnswerLabel label) { return std::string(1, label_char(label)); }

AnswerLabel label_from_json(const json& j, const char* field) {
    std::string s = j.get<std::string>();
    auto label = s.size() == 1 ? label_from_char(s[0]) : std::nullopt;
    if (!label) throw FileFormatError(std::string("bad answer label in field ") + field);
    return *label;
}

}  // namespace

std::string serialize_trajectory(const Trajectory& t) {
    json j;
    j["question_id"] = t.question_id;
    j["model_id"] = t.model_id;
    j["seed"] = t.seed;
    j["subject"] = t.subject;
    j["difficulty"] = difficulty_name(t.difficulty);
    j["cluster"] = cluster_name(t.cluster);
    json order = json::array();
    for (AttackKind kind : t.schedule.order) order.push_back(attack_name(kind));
    j["schedule"] = order;
    if (t.distractor) j["distractor"] = label_string(*t.distractor);

    json initial;
    initial["reply"] = t.initial_reply;
    if (t.initial_parsed) initial["parsed"] = label_string(*t.initial_parsed);
    initial["correct"] = t.initial_correct;
    if (t.initial_confidence) initial["confidence"] = confidence_to_json(*t.initial_confidence);
    j["initial"] = initial;

    json rounds = json::array();
    for (const RoundRecord& r : t.rounds) {
        json round;
        round["round"] = r.round_index;
        round["attack"] = attack_name(r.attack);
        round["rendered"] = r.rendered_attack;
        round["reply"] = r.reply_text;
        if (r.parsed) round["parsed"] = label_string(*r.parsed);
        round["correct"] = r.correct;
        if (r.confidence) round["confidence"] = confidence_to_json(*r.confidence);
        rounds.push_back(round);
    }
    j["rounds"] = rounds;

    if (t.complete_gated()) {
        json c = json::array();
        for (bool b : t.correctness_vector()) c.push_back(b ? 1 : 0);
        j["correctness"] = c;
    }
    j["aborted"] = t.aborted;
    if (t.aborted_at_round) j["aborted_at_round"] = *t.aborted_at_round;
    if (!t.abort_reason.empty()) j["abort_reason"] = t.abort_reason;
    return j.dump();
}

Trajectory parse_trajectory_record(const std::string& line, std::size_t line_no) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw FileFormatError(std::string("malformed trajectory record: ") + e.what(), line_no);
    }
    try {
        Trajectory t;
        t.question_id = j.at("question_id").get<std::string>();
        t.model_id = j.at("model_id").get<std::string>();
        t.seed = j.at("seed").get<std::uint64_t>();
        t.subject = j.at("subject").get<std::string>();
        auto difficulty = difficulty_from_string(j.at("difficulty").get<std::string>());
        if (!difficulty) throw FileFormatError("unknown difficulty");
        t.difficulty = *difficulty;
        t.cluster = cluster_of(t.subject);

        t.schedule.question_id = t.question_id;
        t.schedule.seed = t.seed;
        const json& order = j.at("schedule");
        if (!order.is_array() || order.size() != 8) {
            throw FileFormatError("schedule must have 8 entries");
        }
        for (std::size_t i = 0; i < 8; ++i) {
            auto kind = attack_from_name(order[i].get<std::string>());
            if (!kind) throw FileFormatError("unknown attack kind in schedule");
            t.schedule.order[i] = *kind;
        }
        if (j.contains("distractor")) t.distractor = label_from_json(j["distractor"], "distractor");

        const json& initial = j.at("initial");
        t.initial_reply = initial.at("reply").get<std::string>();
        if (initial.contains("parsed")) t.initial_parsed = label_from_json(initial["parsed"], "parsed");
        t.initial_correct = initial.at("correct").get<bool>();
        if (initial.contains("confidence")) {
            t.initial_confidence = confidence_from_json(initial["confidence"]);
        }

        for (const json& round : j.at("rounds")) {
            RoundRecord r;
            r.round_index = round.at("round").get<int>();
            auto kind = attack_from_name(round.at("attack").get<std::string>());
            if (!kind) throw FileFormatError("unknown attack kind in round");
            r.attack = *kind;
            r.rendered_attack = round.at("rendered").get<std::string>();
            r.reply_text = round.at("reply").get<std::string>();
            if (round.contains("parsed")) r.parsed = label_from_json(round["parsed"], "parsed");
            r.correct = round.at("correct").get<bool>();
            if (round.contains("confidence")) r.confidence = confidence_from_json(round["confidence"]);
            t.rounds.push_back(std::move(r));
        }

        t.aborted = j.at("aborted").get<bool>();
        if (j.contains("aborted_at_round")) t.aborted_at_round = j["aborted_at_round"].get<int>();
        if (j.contains("abort_reason")) t.abort_reason = j["abort_reason"].get<std::string>();
        return t;
    } catch (const json::exception& e) {
        throw FileFormatError(std::string("malformed trajectory record: ") + e.what(), line_no);
    } catch (const FileFormatError& e) {
        throw FileFormatError(std::string("malformed trajectory record: ") + e.what(), line_no);
    }
}

std::string serialize_manifest(const RunManifest& m) {
    json j;
    j["schema_version"] = m.schema_version;
    j["model_id"] = m.model_id;
    j["seeds"] = m.seeds;
    j["gamma"] = m.gamma;
    j["carg"] = carg_mode_name(m.carg);
    j["distractor_mode"] = distractor_mode_name(m.distractor_mode);
    j["distractor_render"] =
        m.distractor_render == DistractorRender::label_only ? "label_only" : "label_and_text";
    j["random_conf_range"] = {m.random_conf_lo, m.random_conf_hi};
    j["template_hash"] = m.template_hash;
    j["prompt_hash"] = m.prompt_hash;
    j["question_count"] = m.question_count;
    j["expected_trajectories"] = m.expected_trajectories;
    j["completed_trajectories"] = m.completed_trajectories;
    j["aborted_trajectories"] = m.aborted_trajectories;
    j["complete"] = m.complete;
    j["started_at"] = m.started_at;
    j["finished_at"] = m.finished_at;
    j["first_error"] = m.first_error;
    return j.dump(2) + "\n";
}

RunManifest parse_manifest(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FileFormatError(std::string("malformed manifest: ") + e.what());
    }
    RunManifest m;
    try {
        m.schema_version = j.at("schema_version").get<int>();
        if (m.schema_version != 1) {
            throw FileFormatError("unsupported manifest schema_version " +
                                  std::to_string(m.schema_version));
        }
        m.model_id = j.at("model_id").get<std::string>();
        m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        m.gamma = j.at("gamma").get<double>();
        auto carg = carg_mode_from_name(j.at("carg").get<std::string>());
        if (!carg) throw FileFormatError("unknown carg mode in manifest");
        m.carg = *carg;
        auto mode = distractor_mode_from_name(j.at("distractor_mode").get<std::string>());
        if (!mode) throw FileFormatError("unknown distractor mode in manifest");
        m.distractor_mode = *mode;
        m.distractor_render = j.at("distractor_render").get<std::string>() == "label_and_text"
                                  ? DistractorRender::label_and_text
                                  : DistractorRender::label_only;
        m.random_conf_lo = j.at("random_conf_range")[0].get<double>();
        m.random_conf_hi = j.at("random_conf_range")[1].get<double>();
        m.template_hash = j.at("template_hash").get<std::string>();
        m.prompt_hash = j.at("prompt_hash").get<std::string>();
        m.question_count = j.at("question_count").get<std::size_t>();
        m.expected_trajectories = j.at("expected_trajectories").get<std::size_t>();
        m.completed_trajectories = j.at("completed_trajectories").get<std::size_t>();
        m.aborted_trajectories = j.at("aborted_trajectories").get<std::size_t>();
        m.complete = j.at("complete").get<bool>();
        m.started_at = j.at("started_at").get<std::string>();
        m.finished_at = j.at("finished_at").get<std::string>();
        m.first_error = j.at("first_error").get<std::string>();
    } catch (const json::exception& e) {
        throw FileFormatError(std::string("malformed manifest: ") + e.what());
    }
    return m;
}

TrajectoryStore::TrajectoryStore(std::string run_dir) : run_dir_(std::move(run_dir)) {
    fs::create_directories(run_dir_);
}

std::string TrajectoryStore::trajectory_path() const {
    return (fs::path(run_dir_) / "trajectories.jsonl").string();
}

std::string TrajectoryStore::manifest_path() const {
    return (fs::path(run_dir_) / "manifest.json").string();
}

bool TrajectoryStore::has_records() const {
    std::error_code ec;
    return fs::exists(trajectory_path(), ec) && fs::file_size(trajectory_path(), ec) > 0;
}

std::vector<Trajectory> TrajectoryStore::load_trajectories() const {
    std::vector<Trajectory> out;
    std::ifstream in(trajectory_path());
    if (!in) return out;

    std::map<std::pair<std::string, std::uint64_t>, std::size_t> index;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Trajectory t;
        try {
            t = parse_trajectory_record(line, line_no);
        } catch (const FileFormatError&) {
            // A truncated trailing line from an interrupted run is expected;
            // anything earlier is real corruption.
            if (in.peek() == std::ifstream::traits_type::eof()) break;
            throw;
        }
        auto key = std::make_pair(t.question_id, t.seed);
        auto it = index.find(key);
        if (it != index.end()) {
            out[it->second] = std::move(t);
        } else {
            index.emplace(key, out.size());
            out.push_back(std::move(t));
        }
    }
    return out;
}

std::optional<RunManifest> TrajectoryStore::load_manifest() const {
    std::ifstream in(manifest_path());
    if (!in) return std::nullopt;
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_manifest(text);
}

void TrajectoryStore::append(const Trajectory& t) {
    std::ofstream out(trajectory_path(), std::ios::app);
    if (!out) throw FileFormatError("cannot append to " + trajectory_path());
    out << serialize_trajectory(t) << '\n';
    out.flush();
    if (!out) throw FileFormatError("write failed: " + trajectory_path());
}

void TrajectoryStore::write_manifest(const RunManifest& m) {
    std::ofstream out(manifest_path(), std::ios::trunc);
    if (!out) throw FileFormatError("cannot write " + manifest_path());
    out << serialize_manifest(m);
    out.flush();
    if (!out) throw FileFormatError("write failed: " + manifest_path());
}

}  // namespace mtc
