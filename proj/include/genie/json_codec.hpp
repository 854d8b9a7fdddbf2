#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "genie/chat.hpp"
#include "genie/error.hpp"
#include "genie/suggestion.hpp"
#include "genie/suggestion_type.hpp"

// Wire shapes shared by the RPC layer and the session journal.

namespace genie {

inline SuggestionState parse_suggestion_state(std::string_view s) {
    if (s == "temporary") return SuggestionState::Temporary;
    if (s == "accepted") return SuggestionState::Accepted;
    if (s == "dismissed") return SuggestionState::Dismissed;
    throw Error(ErrorCode::InvalidConfig, "unknown suggestion state '" + std::string(s) + "'");
}

inline nlohmann::json to_json(const Suggestion& s) {
    return {{"id", s.id},
            {"tag", canonical_id(s.tag)},
            {"description", s.description},
            {"displayDescription", display_description(s.description)},
            {"code", s.code},
            {"explanation", s.explanation},
            {"state", to_string(s.state)}};
}

inline nlohmann::json to_json(const SuggestionGroup& g) {
    auto items = nlohmann::json::array();
    for (const auto& s : g.suggestions) items.push_back(to_json(s));
    return {{"id", g.id}, {"suggestions", items}, {"createdAt", g.created_at}, {"retained", g.retained}};
}

inline Suggestion suggestion_from_json(const nlohmann::json& j) {
    Suggestion s;
    s.id = j.at("id").get<std::string>();
    s.tag = resolve_type(j.at("tag").get<std::string>());
    s.description = j.at("description").get<std::string>();
    s.code = j.value("code", std::string{});
    s.explanation = j.value("explanation", std::string{});
    s.state = parse_suggestion_state(j.value("state", std::string("temporary")));
    return s;
}

inline SuggestionGroup group_from_json(const nlohmann::json& j) {
    SuggestionGroup g;
    g.id = j.at("id").get<std::string>();
    for (const auto& item : j.at("suggestions")) g.suggestions.push_back(suggestion_from_json(item));
    g.created_at = j.value("createdAt", TimeMs{0});
    g.retained = j.value("retained", false);
    return g;
}

inline nlohmann::json to_json(const ChatMessage& m) {
    return {{"role", to_string(m.role)}, {"body", m.body}, {"origin", to_string(m.origin)}, {"at", m.at}};
}

inline ChatMessage message_from_json(const nlohmann::json& j) {
    return ChatMessage{parse_role(j.at("role").get<std::string>()), j.at("body").get<std::string>(),
                       parse_origin(j.value("origin", std::string("typed"))), j.value("at", TimeMs{0})};
}

inline nlohmann::json to_json(const TypeSet& types) {
    auto arr = nlohmann::json::array();
    for (auto t : kAllSuggestionTypes)
        if (types.count(t)) arr.push_back(canonical_id(t));
    return arr;
}

} // namespace genie
