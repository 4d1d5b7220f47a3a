#include "mtc/question_bank.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "mtc/errors.hpp"

namespace mtc {

using nlohmann::json;

char label_char(AnswerLabel label) {
    switch (label) {
        case AnswerLabel::A: return 'A';
        case AnswerLabel::B: return 'B';
        case AnswerLabel::C: return 'C';
        case AnswerLabel::D: return 'D';
    }
    return '?';
}

std::optional<AnswerLabel> label_from_char(char c) {
    switch (c) {
        case 'A': return AnswerLabel::A;
        case 'B': return AnswerLabel::B;
        case 'C': return AnswerLabel::C;
        case 'D': return AnswerLabel::D;
        default: return std::nullopt;
    }
}

std::string difficulty_name(Difficulty d) {
    switch (d) {
        case Difficulty::elementary: return "elementary";
        case Difficulty::high_school: return "high_school";
        case Difficulty::college: return "college";
        case Difficulty::professional: return "professional";
    }
    return "?";
}

namespace {

std::string normalize_key(const std::string& raw) {
    std::size_t b = raw.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = raw.find_last_not_of(" \t\r\n");
    std::string out = raw.substr(b, e - b + 1);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// The 39-subject table. Keys are lowercase; lookups normalize first.
const std::unordered_map<std::string, DomainCluster>& subject_table() {
    static const std::unordered_map<std::string, DomainCluster> table = {
        // STEM (11)
        {"mathematics", DomainCluster::STEM},
        {"statistics", DomainCluster::STEM},
        {"abstract algebra", DomainCluster::STEM},
        {"physics", DomainCluster::STEM},
        {"conceptual physics", DomainCluster::STEM},
        {"astronomy", DomainCluster::STEM},
        {"chemistry", DomainCluster::STEM},
        {"computer science", DomainCluster::STEM},
        {"computer security", DomainCluster::STEM},
        {"machine learning", DomainCluster::STEM},
        {"electrical engineering", DomainCluster::STEM},
        // Medical / Health (8)
        {"medicine", DomainCluster::MedicalHealth},
        {"clinical knowledge", DomainCluster::MedicalHealth},
        {"medical genetics", DomainCluster::MedicalHealth},
        {"biology", DomainCluster::MedicalHealth},
        {"anatomy", DomainCluster::MedicalHealth},
        {"virology", DomainCluster::MedicalHealth},
        {"nutrition", DomainCluster::MedicalHealth},
        {"human sexuality", DomainCluster::MedicalHealth},
        // Social Sciences (4)
        {"psychology", DomainCluster::SocialSciences},
        {"sociology", DomainCluster::SocialSciences},
        {"moral scenarios", DomainCluster::SocialSciences},
        {"global facts", DomainCluster::SocialSciences},
        // Humanities (6)
        {"philosophy", DomainCluster::Humanities},
        {"formal logic", DomainCluster::Humanities},
        {"world religions", DomainCluster::Humanities},
        {"world history", DomainCluster::Humanities},
        {"us history", DomainCluster::Humanities},
        {"prehistory", DomainCluster::Humanities},
        // Business / Economics (5)
        {"microeconomics", DomainCluster::BusinessEconomics},
        {"econometrics", DomainCluster::BusinessEconomics},
        {"accounting", DomainCluster::BusinessEconomics},
        {"marketing", DomainCluster::BusinessEconomics},
        {"management", DomainCluster::BusinessEconomics},
        // Law / Legal (3)
        {"law", DomainCluster::LawLegal},
        {"jurisprudence", DomainCluster::LawLegal},
        {"international law", DomainCluster::LawLegal},
        // General Knowledge (2)
        {"truthful", DomainCluster::GeneralKnowledge},
        {"common sense", DomainCluster::GeneralKnowledge},
    };
    return table;
}

}  // namespace

std::optional<Difficulty> difficulty_from_string(const std::string& raw) {
    std::string key = normalize_key(raw);
    std::replace(key.begin(), key.end(), ' ', '_');
    if (key == "elementary") return Difficulty::elementary;
    if (key == "high_school") return Difficulty::high_school;
    if (key == "college") return Difficulty::college;
    if (key == "professional") return Difficulty::professional;
    return std::nullopt;
}

std::string cluster_name(DomainCluster c) {
    switch (c) {
        case DomainCluster::STEM: return "STEM";
        case DomainCluster::MedicalHealth: return "MedicalHealth";
        case DomainCluster::SocialSciences: return "SocialSciences";
        case DomainCluster::Humanities: return "Humanities";
        case DomainCluster::BusinessEconomics: return "BusinessEconomics";
        case DomainCluster::LawLegal: return "LawLegal";
        case DomainCluster::GeneralKnowledge: return "GeneralKnowledge";
    }
    return "?";
}

DomainCluster cluster_of(const std::string& subject) {
    const auto& table = subject_table();
    auto it = table.find(normalize_key(subject));
    if (it == table.end()) {
        throw FileFormatError("unknown subject: \"" + subject + "\"");
    }
    return it->second;
}

Question parse_question_record(const std::string& line, std::size_t line_no) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw FileFormatError(std::string("malformed record: ") + e.what(), line_no);
    }
    if (!j.is_object()) throw FileFormatError("malformed record: not an object", line_no);

    auto require_string = [&](const char* field) -> std::string {
        if (!j.contains(field) || !j[field].is_string()) {
            throw FileFormatError(std::string("malformed record: field \"") + field +
                                      "\" missing or not a string",
                                  line_no);
        }
        return j[field].get<std::string>();
    };

    Question q;
    q.id = require_string("id");
    if (q.id.empty()) throw FileFormatError("malformed record: field \"id\" empty", line_no);
    q.text = require_string("question");
    if (q.text.empty())
        throw FileFormatError("malformed record: field \"question\" empty", line_no);

    if (!j.contains("options") || !j["options"].is_object()) {
        throw FileFormatError("malformed record: field \"options\" missing or not an object",
                              line_no);
    }
    for (AnswerLabel label : kAllLabels) {
        std::string key(1, label_char(label));
        const auto& opts = j["options"];
        if (!opts.contains(key) || !opts[key].is_string() ||
            opts[key].get<std::string>().empty()) {
            throw FileFormatError(
                "malformed record: field \"options." + key + "\" missing or empty", line_no);
        }
        q.options[label] = opts[key].get<std::string>();
    }

    std::string correct = require_string("correct");
    auto label = correct.size() == 1 ? label_from_char(correct[0]) : std::nullopt;
    if (!label) {
        throw FileFormatError(
            "malformed record: field \"correct\" must be one of A, B, C, D (got \"" + correct +
                "\")",
            line_no);
    }
    q.correct = *label;

    q.subject = require_string("subject");
    try {
        q.cluster = cluster_of(q.subject);
    } catch (const FileFormatError& e) {
        throw FileFormatError(std::string("malformed record: ") + e.what(), line_no);
    }

    std::string difficulty = require_string("difficulty");
    auto diff = difficulty_from_string(difficulty);
    if (!diff) {
        throw FileFormatError(
            "malformed record: field \"difficulty\" unknown (got \"" + difficulty + "\")",
            line_no);
    }
    q.difficulty = *diff;
    return q;
}

std::string serialize_question(const Question& q) {
    json j;
    j["id"] = q.id;
    j["question"] = q.text;
    json opts;
    for (AnswerLabel label : kAllLabels) {
        opts[std::string(1, label_char(label))] = q.options.at(label);
    }
    j["options"] = opts;
    j["correct"] = std::string(1, label_char(q.correct));
    j["subject"] = q.subject;
    j["difficulty"] = difficulty_name(q.difficulty);
    return j.dump();
}

std::vector<Question> load_questions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileFormatError("cannot open question file: " + path);

    std::vector<Question> questions;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        Question q = parse_question_record(line, line_no);
        if (!seen_ids.insert(q.id).second) {
            throw FileFormatError("duplicate question id \"" + q.id + "\"", line_no);
        }
        questions.push_back(std::move(q));
    }
    return questions;
}

}  // namespace mtc
