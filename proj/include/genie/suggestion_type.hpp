#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include "genie/error.hpp"

namespace genie {

enum class SuggestionType {
    Improvement,
    Explanation,
    Brainstorm,
    Test,
    BugFix,
    SyntaxHint,
};

inline constexpr std::array<SuggestionType, 6> kAllSuggestionTypes{
    SuggestionType::Improvement, SuggestionType::Explanation, SuggestionType::Brainstorm,
    SuggestionType::Test,        SuggestionType::BugFix,      SuggestionType::SyntaxHint,
};

using TypeSet = std::set<SuggestionType>;

inline TypeSet all_types() { return TypeSet(kAllSuggestionTypes.begin(), kAllSuggestionTypes.end()); }

/// Canonical wire id, e.g. "bug-fix".
constexpr std::string_view canonical_id(SuggestionType type) noexcept {
    switch (type) {
    case SuggestionType::Improvement: return "improvement";
    case SuggestionType::Explanation: return "explanation";
    case SuggestionType::Brainstorm: return "brainstorm";
    case SuggestionType::Test: return "test";
    case SuggestionType::BugFix: return "bug-fix";
    case SuggestionType::SyntaxHint: return "syntax-hint";
    }
    return "";
}

/// Plural phrase used when listing enabled types in the prompt.
constexpr std::string_view display_label(SuggestionType type) noexcept {
    switch (type) {
    case SuggestionType::Improvement: return "code improvements";
    case SuggestionType::Explanation: return "code explanations";
    case SuggestionType::Brainstorm: return "brainstorming ideas";
    case SuggestionType::Test: return "additional testing";
    case SuggestionType::BugFix: return "bug fixes";
    case SuggestionType::SyntaxHint: return "syntax hints";
    }
    return "";
}

inline std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline std::string trim(std::string_view s) {
    auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

/// Case-insensitive label → canonical type lookup. Canonical ids always
/// resolve to themselves; extra aliases can be layered on from config.
class AliasTable {
public:
    AliasTable() {
        for (auto t : kAllSuggestionTypes) entries_[std::string(canonical_id(t))] = t;
        add("debugging", SuggestionType::BugFix);
        add("bug fix", SuggestionType::BugFix);
        add("bug fixes", SuggestionType::BugFix);
        add("bugfix", SuggestionType::BugFix);
        add("efficiency", SuggestionType::Improvement);
        add("improvements", SuggestionType::Improvement);
        add("code improvements", SuggestionType::Improvement);
        add("testing", SuggestionType::Test);
        add("tests", SuggestionType::Test);
        add("additional testing", SuggestionType::Test);
        add("explanations", SuggestionType::Explanation);
        add("code explanations", SuggestionType::Explanation);
        add("ideas", SuggestionType::Brainstorm);
        add("brainstorming", SuggestionType::Brainstorm);
        add("brainstorming ideas", SuggestionType::Brainstorm);
        add("syntax", SuggestionType::SyntaxHint);
        add("syntax hint", SuggestionType::SyntaxHint);
        add("syntax hints", SuggestionType::SyntaxHint);
    }

    void add(std::string_view alias, SuggestionType type) { entries_[lowercase(trim(alias))] = type; }

    const SuggestionType* find(std::string_view label) const {
        auto it = entries_.find(lowercase(trim(label)));
        return it == entries_.end() ? nullptr : &it->second;
    }

    SuggestionType resolve(std::string_view label) const {
        if (const auto* t = find(label)) return *t;
        throw Error(ErrorCode::UnknownType, "unknown suggestion type '" + std::string(label) + "'");
    }

    const std::map<std::string, SuggestionType>& entries() const noexcept { return entries_; }

    static const AliasTable& builtin() {
        static const AliasTable table;
        return table;
    }

private:
    std::map<std::string, SuggestionType> entries_;
};

inline SuggestionType resolve_type(std::string_view label, const AliasTable& table = AliasTable::builtin()) {
    return table.resolve(label);
}

template <class Range>
TypeSet resolve_types(const Range& labels, const AliasTable& table = AliasTable::builtin()) {
    TypeSet out;
    for (const auto& label : labels) out.insert(table.resolve(label));
    return out;
}

} // namespace genie
