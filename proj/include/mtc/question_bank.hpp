#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mtc {

enum class AnswerLabel { A, B, C, D };

constexpr std::array<AnswerLabel, 4> kAllLabels = {AnswerLabel::A, AnswerLabel::B,
                                                   AnswerLabel::C, AnswerLabel::D};

char label_char(AnswerLabel label);
std::optional<AnswerLabel> label_from_char(char c);

enum class Difficulty { elementary, high_school, college, professional };

std::string difficulty_name(Difficulty d);
std::optional<Difficulty> difficulty_from_string(const std::string& raw);

// Seven thematic groupings of the 39 question subjects.
enum class DomainCluster {
    STEM,
    MedicalHealth,
    SocialSciences,
    Humanities,
    BusinessEconomics,
    LawLegal,
    GeneralKnowledge,
};

constexpr std::array<DomainCluster, 7> kAllClusters = {
    DomainCluster::STEM,           DomainCluster::MedicalHealth,
    DomainCluster::SocialSciences, DomainCluster::Humanities,
    DomainCluster::BusinessEconomics, DomainCluster::LawLegal,
    DomainCluster::GeneralKnowledge,
};

std::string cluster_name(DomainCluster c);

// Resolves one of the 39 known subjects (case-insensitive, trimmed) to its
// cluster. Throws FileFormatError on unknown subjects.
DomainCluster cluster_of(const std::string& subject);

struct Question {
    std::string id;
    std::string text;
    std::map<AnswerLabel, std::string> options;  // all four present, non-empty
    AnswerLabel correct = AnswerLabel::A;
    std::string subject;
    Difficulty difficulty = Difficulty::elementary;
    DomainCluster cluster = DomainCluster::GeneralKnowledge;  // derived from subject

    const std::string& option_text(AnswerLabel label) const { return options.at(label); }
};

// Loads a JSONL question file: one object per line with fields
// {id, question, options{A,B,C,D}, correct, subject, difficulty}.
// Errors report the 1-based line number. Duplicate ids are rejected.
std::vector<Question> load_questions(const std::string& path);

// Parses a single record line; `line_no` is used for error reporting only.
Question parse_question_record(const std::string& line, std::size_t line_no);

// Serializes back to the on-disk record format (load → serialize → load is a
// fixed point).
std::string serialize_question(const Question& q);

}  // namespace mtc
