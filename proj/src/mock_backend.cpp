#include "mtc/mock_backend.hpp"

#include <fstream>

#include <json.hpp>

#include "mtc/errors.hpp"
#include "mtc/rng.hpp"

namespace mtc {

using nlohmann::json;

namespace {

void check_prob(double p, const char* field) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ConfigError(std::string("profile field ") + field + " must be in [0,1]");
    }
}

void check_logprob(double lp, const char* field) {
    if (!(lp <= 0.0)) {
        throw ConfigError(std::string("profile field ") + field + " must be <= 0");
    }
}

}  // namespace

void BehaviorProfile::validate() const {
    check_prob(initial_correct_prob, "initial_correct_prob");
    check_prob(recovery_prob, "recovery_prob");
    for (const auto& [kind, p] : flip_prob) check_prob(p, "flip_prob");
    check_logprob(logprob_correct, "logprob_correct");
    check_logprob(logprob_flipped, "logprob_flipped");
    check_logprob(logprob_filler, "logprob_filler");
}

BehaviorProfile parse_profile_record(const std::string& line, std::size_t line_no) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw FileFormatError(std::string("malformed profile record: ") + e.what(), line_no);
    }
    BehaviorProfile p;
    if (j.contains("profile_id")) p.profile_id = j["profile_id"].get<std::string>();
    if (j.contains("initial_correct_prob"))
        p.initial_correct_prob = j["initial_correct_prob"].get<double>();
    if (j.contains("recovery_prob")) p.recovery_prob = j["recovery_prob"].get<double>();
    if (j.contains("flip_prob")) {
        for (const auto& [key, value] : j["flip_prob"].items()) {
            auto kind = attack_from_name(key);
            if (!kind) {
                throw FileFormatError("unknown attack kind in flip_prob: \"" + key + "\"",
                                      line_no);
            }
            p.flip_prob[*kind] = value.get<double>();
        }
    }
    if (j.contains("logprob_correct")) p.logprob_correct = j["logprob_correct"].get<double>();
    if (j.contains("logprob_flipped")) p.logprob_flipped = j["logprob_flipped"].get<double>();
    if (j.contains("logprob_filler")) p.logprob_filler = j["logprob_filler"].get<double>();
    if (j.contains("emit_logprobs")) p.emit_logprobs = j["emit_logprobs"].get<bool>();
    if (j.contains("seed")) p.seed = j["seed"].get<std::uint64_t>();
    try {
        p.validate();
    } catch (const ConfigError& e) {
        throw FileFormatError(e.what(), line_no);
    }
    return p;
}

std::string serialize_profile(const BehaviorProfile& p) {
    json j;
    j["profile_id"] = p.profile_id;
    j["initial_correct_prob"] = p.initial_correct_prob;
    j["recovery_prob"] = p.recovery_prob;
    json fp = json::object();
    for (const auto& [kind, prob] : p.flip_prob) fp[attack_name(kind)] = prob;
    j["flip_prob"] = fp;
    j["logprob_correct"] = p.logprob_correct;
    j["logprob_flipped"] = p.logprob_flipped;
    j["logprob_filler"] = p.logprob_filler;
    j["emit_logprobs"] = p.emit_logprobs;
    j["seed"] = p.seed;
    return j.dump();
}

std::vector<BehaviorProfile> load_profiles(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileFormatError("cannot open profile file: " + path);
    std::vector<BehaviorProfile> profiles;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        profiles.push_back(parse_profile_record(line, line_no));
    }
    if (profiles.empty()) throw FileFormatError("profile file has no records: " + path);
    return profiles;
}

MockBackend::MockBackend(BehaviorProfile profile, const std::vector<Question>& bank,
                         AttackTemplates templates, DistractorRender render)
    : profile_(std::move(profile)), templates_(std::move(templates)), render_(render) {
    profile_.validate();
    for (const Question& q : bank) {
        std::string first_line = q.text.substr(0, q.text.find('\n'));
        by_first_line_.emplace(first_line, q);
    }
}

std::vector<std::string> MockBackend::tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t start = i;
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        tokens.push_back(text.substr(start, i - start));
    }
    return tokens;
}

const Question& MockBackend::resolve_question(const std::vector<ChatTurn>& conversation) const {
    for (const ChatTurn& turn : conversation) {
        if (turn.role != Role::user) continue;
        std::string first_line = turn.content.substr(0, turn.content.find('\n'));
        auto it = by_first_line_.find(first_line);
        if (it == by_first_line_.end()) {
            throw BackendError("mock: question not found in bank: \"" + first_line + "\"");
        }
        return it->second;
    }
    throw BackendError("mock: conversation has no user turn");
}

MockBackend::ParsedAttack MockBackend::match_attack(const std::string& content) const {
    for (AttackKind kind : kAllAttacks) {
        if (!needs_distractor(kind)) {
            if (content == templates_.raw_template(kind)) return {kind, std::nullopt};
            continue;
        }
        const std::string& tmpl = templates_.raw_template(kind);
        std::size_t slot = tmpl.find("{answer}");
        std::string prefix = tmpl.substr(0, slot);
        std::string suffix = tmpl.substr(slot + std::string("{answer}").size());
        if (content.size() <= prefix.size() + suffix.size()) continue;
        if (content.compare(0, prefix.size(), prefix) != 0) continue;
        if (content.compare(content.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
        auto label = label_from_char(content[prefix.size()]);
        if (label) return {kind, label};
    }
    throw BackendError("mock: unrecognized follow-up message: \"" + content + "\"");
}

double MockBackend::draw(const std::vector<ChatTurn>& conversation, const char* tag) const {
    std::uint64_t h = rng::kFnvOffset;
    h = rng::fnv1a64(tag, h);
    h = rng::fnv1a64(std::to_string(profile_.seed), h);
    for (const ChatTurn& turn : conversation) {
        h = rng::fnv1a64(role_name(turn.role), h);
        h = rng::fnv1a64("\x1f", h);
        h = rng::fnv1a64(turn.content, h);
        h = rng::fnv1a64("\x1e", h);
    }
    return rng::hash_to_unit(h);
}

ModelReply MockBackend::compose_reply(const Question& question, AnswerLabel answer) const {
    const std::string& option = question.option_text(answer);
    std::string text = std::string(kAnswerMarker) + " " + label_char(answer) + ". " + option +
                       ".\n\nAfter reviewing the options, " + option +
                       " is the most consistent choice.";

    ModelReply reply;
    reply.text = text;
    reply.backend_id = id();
    if (profile_.emit_logprobs) {
        double answer_level =
            answer == question.correct ? profile_.logprob_correct : profile_.logprob_flipped;
        auto span = find_answer_span(text);
        std::vector<TokenLogprob> logprobs;
        std::size_t offset = 0;
        for (std::string& token : tokenize(text)) {
            std::size_t begin = offset;
            std::size_t end = offset + token.size();
            bool in_span = span && begin < span->second && end > span->first;
            logprobs.push_back({std::move(token), in_span ? answer_level : profile_.logprob_filler});
            offset = end;
        }
        reply.token_logprobs = std::move(logprobs);
    }
    return reply;
}

ModelReply MockBackend::send(const std::vector<ChatTurn>& conversation,
                             const RequestOptions& /*options*/) {
    if (conversation.empty() || conversation.back().role != Role::user) {
        throw BackendError("mock: conversation must end with a user turn");
    }
    const Question& question = resolve_question(conversation);

    // Replay prior assistant turns to recover the current answer state.
    std::optional<AnswerLabel> current;
    for (const ChatTurn& turn : conversation) {
        if (turn.role != Role::assistant) continue;
        auto parsed = parse_answer(turn.content);
        if (parsed) current = parsed;
    }

    AnswerLabel answer;
    if (!current) {
        bool correct = draw(conversation, "initial") < profile_.initial_correct_prob;
        answer = correct ? question.correct
                         : select_distractor(question, DistractorMode::first_incorrect, 0);
    } else {
        ParsedAttack attack = match_attack(conversation.back().content);
        bool currently_correct = *current == question.correct;
        if (currently_correct) {
            auto it = profile_.flip_prob.find(attack.kind);
            double p = it == profile_.flip_prob.end() ? 0.0 : it->second;
            if (draw(conversation, "flip") < p) {
                answer = attack.distractor && *attack.distractor != question.correct
                             ? *attack.distractor
                             : select_distractor(question, DistractorMode::first_incorrect, 0);
            } else {
                answer = *current;
            }
        } else {
            answer = draw(conversation, "recover") < profile_.recovery_prob ? question.correct
                                                                            : *current;
        }
    }
    return compose_reply(question, answer);
}

}  // namespace mtc
