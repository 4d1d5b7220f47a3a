#include "mtc/model_backend.hpp"

#include <cctype>

namespace mtc {

std::string role_name(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "?";
}

std::optional<Role> role_from_name(const std::string& name) {
    if (name == "system") return Role::system;
    if (name == "user") return Role::user;
    if (name == "assistant") return Role::assistant;
    return std::nullopt;
}

std::optional<std::pair<std::size_t, std::size_t>> find_answer_span(const std::string& text) {
    const std::string marker = kAnswerMarker;
    std::size_t search_end = text.size();
    while (true) {
        std::size_t pos = text.rfind(marker, search_end);
        if (pos == std::string::npos) return std::nullopt;

        std::size_t cur = pos + marker.size();
        while (cur < text.size() && (text[cur] == ' ' || text[cur] == '\t')) ++cur;
        if (cur < text.size() && label_from_char(text[cur])) {
            // Label must end at a word boundary so "Answers" does not match.
            bool boundary = cur + 1 >= text.size() ||
                            !std::isalnum(static_cast<unsigned char>(text[cur + 1]));
            if (boundary) return std::make_pair(pos, cur + 1);
        }
        if (pos == 0) return std::nullopt;
        search_end = pos - 1;
    }
}

std::optional<AnswerLabel> parse_answer(const std::string& text) {
    auto span = find_answer_span(text);
    if (!span) return std::nullopt;
    return label_from_char(text[span->second - 1]);
}

}  // namespace mtc
