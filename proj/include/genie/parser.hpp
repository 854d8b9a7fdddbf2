#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "genie/error.hpp"
#include "genie/suggestion.hpp"
#include "genie/suggestion_type.hpp"

namespace genie {

/// A parsed group together with the non-fatal problems found on the way.
struct ParsedGroup {
    SuggestionGroup group;
    std::vector<std::string> warnings;
};

namespace detail {

/// Returns the payload of the first ``` fenced block, or the trimmed input
/// when it already starts with JSON or has no fence. The closing fence must
/// start a line; an unterminated fence runs to the end of input.
inline std::string strip_fences(std::string_view raw) {
    std::string text = trim(raw);
    if (!text.empty() && (text.front() == '[' || text.front() == '{')) return text;
    const auto open = text.find("```");
    if (open == std::string::npos) return text;
    auto body_start = text.find('\n', open);
    if (body_start == std::string::npos) return {};
    ++body_start;
    std::size_t close = text.size();
    if (text.compare(body_start, 3, "```") == 0) {
        close = body_start;
    } else if (auto nl = text.find("\n```", body_start); nl != std::string::npos) {
        close = nl;
    }
    return trim(std::string_view(text).substr(body_start, close - body_start));
}

inline const std::string* string_field(const nlohmann::json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) return nullptr;
    return it->get_ptr<const std::string*>();
}

} // namespace detail

/// Turns raw model output into a suggestion group.
///
/// Items with an unknown or disabled tag, or without a description, are
/// dropped with a warning. At most the first three surviving items are kept.
/// Suggestion ids are `<group_id>-<n>` with n counting from 1.
inline Result<ParsedGroup> parse_response(std::string_view raw, const TypeSet& enabled,
                                          std::string group_id = "g", TimeMs created_at = 0,
                                          const AliasTable& aliases = AliasTable::builtin()) {
    using nlohmann::json;
    const std::string payload = detail::strip_fences(raw);
    json doc = json::parse(payload, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) return make_error(ErrorCode::ParseFailure, "response is not valid JSON");
    if (!doc.is_array()) return make_error(ErrorCode::ParseFailure, "response is not a JSON array");
    for (const auto& item : doc) {
        if (!item.is_object()) return make_error(ErrorCode::ParseFailure, "array element is not an object");
    }
    if (doc.empty()) return make_error(ErrorCode::EmptyGroup, "response array is empty");

    ParsedGroup out;
    out.group.id = std::move(group_id);
    out.group.created_at = created_at;
    std::size_t schema_misses = 0;

    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& item = doc[i];
        const auto* tag = detail::string_field(item, "tag");
        const auto* description = detail::string_field(item, "description");
        if (!tag || !description || trim(*description).empty()) {
            ++schema_misses;
            out.warnings.push_back("item " + std::to_string(i) + ": missing tag or description");
            continue;
        }
        const auto* type = aliases.find(*tag);
        if (!type) {
            out.warnings.push_back("item " + std::to_string(i) + ": unknown tag '" + *tag + "'");
            continue;
        }
        if (!enabled.count(*type)) {
            out.warnings.push_back("item " + std::to_string(i) + ": tag '" + *tag + "' is not enabled");
            continue;
        }
        if (out.group.suggestions.size() == kMaxGroupSize) {
            out.warnings.push_back("item " + std::to_string(i) + ": more than three suggestions, ignored");
            continue;
        }
        Suggestion s;
        s.tag = *type;
        s.description = *description;
        if (const auto* code = detail::string_field(item, "code")) s.code = *code;
        if (const auto* expl = detail::string_field(item, "explanation")) s.explanation = *expl;
        out.group.suggestions.push_back(std::move(s));
    }

    if (schema_misses == doc.size()) {
        return make_error(ErrorCode::SchemaViolation, "no item carries both a tag and a description");
    }
    if (out.group.suggestions.empty()) {
        return make_error(ErrorCode::EmptyGroup, "no suggestion survived tag filtering");
    }
    for (std::size_t i = 0; i < out.group.suggestions.size(); ++i) {
        out.group.suggestions[i].id = out.group.id + "-" + std::to_string(i + 1);
    }
    return out;
}

inline nlohmann::json group_payload(const SuggestionGroup& group) {
    auto arr = nlohmann::json::array();
    for (const auto& s : group.suggestions) {
        arr.push_back({{"tag", canonical_id(s.tag)},
                       {"description", s.description},
                       {"code", s.code},
                       {"explanation", s.explanation}});
    }
    return arr;
}

/// The exact array shape `parse_response` accepts.
inline std::string serialize_group(const SuggestionGroup& group) {
    return group_payload(group).dump(2, ' ', false, nlohmann::json::error_handler_t::replace);
}

} // namespace genie
