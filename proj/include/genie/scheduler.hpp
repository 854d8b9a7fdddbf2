#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string_view>

#include "genie/error.hpp"

namespace genie {

/// Milliseconds on a monotonic clock. The scheduler never reads a clock itself.
using TimeMs = std::int64_t;

enum class EventKind {
    CodeChange,
    ChatTyping,
    ChatMessageSent,
    SuggestionInteraction,
    SuggestionAccepted,
    ManualTrigger,
    RequestCompleted,
    RequestFailed,
};

constexpr std::string_view to_string(EventKind kind) noexcept {
    switch (kind) {
    case EventKind::CodeChange: return "CodeChange";
    case EventKind::ChatTyping: return "ChatTyping";
    case EventKind::ChatMessageSent: return "ChatMessageSent";
    case EventKind::SuggestionInteraction: return "SuggestionInteraction";
    case EventKind::SuggestionAccepted: return "SuggestionAccepted";
    case EventKind::ManualTrigger: return "ManualTrigger";
    case EventKind::RequestCompleted: return "RequestCompleted";
    case EventKind::RequestFailed: return "RequestFailed";
    }
    return "?";
}

constexpr bool is_chat_interaction(EventKind kind) noexcept {
    return kind == EventKind::ChatTyping || kind == EventKind::ChatMessageSent ||
           kind == EventKind::SuggestionInteraction || kind == EventKind::SuggestionAccepted;
}

struct SchedulerEvent {
    EventKind kind;
    TimeMs at = 0;
};

struct SchedulerConfig {
    TimeMs t_code_quiet = 5000;
    TimeMs t_chat_quiet = 30000;

    void validate() const {
        if (t_code_quiet <= 0 || t_chat_quiet <= 0) {
            throw Error(ErrorCode::InvalidConfig, "scheduler quiet periods must be positive");
        }
        if (t_chat_quiet <= t_code_quiet) {
            throw Error(ErrorCode::InvalidConfig, "t_chat_quiet must exceed t_code_quiet");
        }
    }
};

struct SchedulerState {
    std::optional<TimeMs> arm_deadline;
    TimeMs suppress_until = 0;
    bool in_flight = false;
    bool retain_current_group = false;
    std::optional<TimeMs> last_seen;

    friend bool operator==(const SchedulerState&, const SchedulerState&) = default;
};

enum class SchedulerAction { None, FireRequest, CancelInFlight };

constexpr std::string_view to_string(SchedulerAction action) noexcept {
    switch (action) {
    case SchedulerAction::None: return "None";
    case SchedulerAction::FireRequest: return "FireRequest";
    case SchedulerAction::CancelInFlight: return "CancelInFlight";
    }
    return "?";
}

struct Transition {
    SchedulerState state;
    SchedulerAction action = SchedulerAction::None;
};

/// Refresh logic for proactive requests.
///
/// A code change (re)arms the debounce deadline and cancels any in-flight
/// request. Chat interactions push `suppress_until` forward and disarm the
/// deadline, so only a later code change can re-arm it. A manual trigger
/// ignores both deadlines but still honours the single in-flight rule.
inline Transition on_event(SchedulerState state, const SchedulerConfig& cfg, const SchedulerEvent& ev) {
    if (state.last_seen && ev.at < *state.last_seen) {
        throw Error(ErrorCode::StaleEvent, "event at " + std::to_string(ev.at) + " precedes " +
                                               std::to_string(*state.last_seen));
    }
    state.last_seen = ev.at;
    SchedulerAction action = SchedulerAction::None;

    switch (ev.kind) {
    case EventKind::CodeChange:
        state.arm_deadline = ev.at + cfg.t_code_quiet;
        if (state.in_flight) {
            state.in_flight = false;
            action = SchedulerAction::CancelInFlight;
        }
        break;
    case EventKind::SuggestionAccepted:
        state.retain_current_group = true;
        [[fallthrough]];
    case EventKind::ChatTyping:
    case EventKind::ChatMessageSent:
    case EventKind::SuggestionInteraction:
        state.suppress_until = std::max(state.suppress_until, ev.at + cfg.t_chat_quiet);
        state.arm_deadline.reset();
        break;
    case EventKind::ManualTrigger:
        if (!state.in_flight) {
            state.in_flight = true;
            state.arm_deadline.reset();
            action = SchedulerAction::FireRequest;
        }
        break;
    case EventKind::RequestCompleted:
        state.retain_current_group = false;
        state.in_flight = false;
        break;
    case EventKind::RequestFailed:
        state.in_flight = false;
        break;
    }
    return {state, action};
}

/// Fires when the debounce deadline has passed outside any suppression window.
inline Transition tick(SchedulerState state, const SchedulerConfig&, TimeMs now) {
    if (state.last_seen && now < *state.last_seen) return {state, SchedulerAction::None};
    if (state.arm_deadline && now >= *state.arm_deadline && now >= state.suppress_until &&
        !state.in_flight) {
        state.arm_deadline.reset();
        state.in_flight = true;
        return {state, SchedulerAction::FireRequest};
    }
    return {state, SchedulerAction::None};
}

/// Earliest time at which `tick` could fire, if any.
inline std::optional<TimeMs> next_fire_time(const SchedulerState& state) {
    if (!state.arm_deadline || state.in_flight) return std::nullopt;
    return std::max(*state.arm_deadline, state.suppress_until);
}

/// Owning wrapper for hosts that prefer a mutable object over the pure functions.
class Scheduler {
public:
    explicit Scheduler(SchedulerConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

    SchedulerAction on_event(EventKind kind, TimeMs at) {
        auto t = genie::on_event(state_, cfg_, SchedulerEvent{kind, at});
        state_ = t.state;
        return t.action;
    }

    SchedulerAction tick(TimeMs now) {
        auto t = genie::tick(state_, cfg_, now);
        state_ = t.state;
        return t.action;
    }

    std::optional<TimeMs> next_fire_time() const { return genie::next_fire_time(state_); }
    const SchedulerState& state() const noexcept { return state_; }
    const SchedulerConfig& config() const noexcept { return cfg_; }

private:
    SchedulerConfig cfg_;
    SchedulerState state_;
};

} // namespace genie
