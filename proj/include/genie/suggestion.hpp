#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "genie/scheduler.hpp"
#include "genie/suggestion_type.hpp"

namespace genie {

enum class SuggestionState { Temporary, Accepted, Dismissed };

constexpr std::string_view to_string(SuggestionState s) noexcept {
    switch (s) {
    case SuggestionState::Temporary: return "temporary";
    case SuggestionState::Accepted: return "accepted";
    case SuggestionState::Dismissed: return "dismissed";
    }
    return "?";
}

struct Suggestion {
    std::string id;
    SuggestionType tag = SuggestionType::Improvement;
    std::string description;
    std::string code;
    std::string explanation;
    SuggestionState state = SuggestionState::Temporary;
};

inline constexpr std::size_t kMaxGroupSize = 3;
inline constexpr std::size_t kDescriptionDisplayLimit = 200;

struct SuggestionGroup {
    std::string id;
    std::vector<Suggestion> suggestions;
    TimeMs created_at = 0;
    bool retained = false;
};

/// Display form of a description: at most 200 characters, with an ellipsis
/// marker when cut. The stored description is never modified.
inline std::string display_description(std::string_view description) {
    if (description.size() <= kDescriptionDisplayLimit) return std::string(description);
    std::size_t cut = kDescriptionDisplayLimit - 3;
    // keep UTF-8 sequences whole
    while (cut > 0 && (static_cast<unsigned char>(description[cut]) & 0xC0) == 0x80) --cut;
    return std::string(description.substr(0, cut)) + "...";
}

} // namespace genie
