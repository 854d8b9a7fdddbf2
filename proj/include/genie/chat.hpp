#pragma once

#include <string>
#include <string_view>

#include "genie/error.hpp"
#include "genie/scheduler.hpp"

namespace genie {

enum class Role { User, Assistant };
enum class MessageOrigin { Typed, AcceptedSuggestion };

constexpr std::string_view to_string(Role r) noexcept { return r == Role::User ? "user" : "assistant"; }
constexpr std::string_view to_string(MessageOrigin o) noexcept {
    return o == MessageOrigin::Typed ? "typed" : "accepted-suggestion";
}

inline Role parse_role(std::string_view s) {
    if (s == "user") return Role::User;
    if (s == "assistant") return Role::Assistant;
    throw Error(ErrorCode::InvalidConfig, "unknown role '" + std::string(s) + "'");
}

inline MessageOrigin parse_origin(std::string_view s) {
    if (s == "typed") return MessageOrigin::Typed;
    if (s == "accepted-suggestion") return MessageOrigin::AcceptedSuggestion;
    throw Error(ErrorCode::InvalidConfig, "unknown message origin '" + std::string(s) + "'");
}

struct ChatMessage {
    Role role = Role::User;
    std::string body;
    MessageOrigin origin = MessageOrigin::Typed;
    TimeMs at = 0;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

} // namespace genie
