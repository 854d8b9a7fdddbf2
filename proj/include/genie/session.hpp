#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "genie/chat.hpp"
#include "genie/error.hpp"
#include "genie/json_codec.hpp"
#include "genie/prompt.hpp"
#include "genie/suggestion.hpp"

namespace genie {

struct SessionConfig {
    TaskDescription task;
    TypeSet enabled = all_types();
    std::string model = "gpt-4o";
};

struct AnchoredGroup {
    SuggestionGroup group;
    /// Number of chat messages that preceded the group when it was published.
    std::size_t anchor = 0;
};

struct SessionState {
    std::vector<ChatMessage> messages;
    std::optional<AnchoredGroup> current;
    std::vector<AnchoredGroup> retained_groups;
    SessionConfig config;
};

struct PublishOutcome {
    std::optional<std::string> discarded_group; // unretained predecessor, gone
    std::optional<std::string> retained_group;  // retained predecessor, kept at its anchor
};

/// Body of the assistant message created when a suggestion is accepted:
/// description, blank line, fenced code, blank line, explanation. Empty
/// parts are left out.
inline std::string render_accepted(const Suggestion& s) {
    std::string body = s.description;
    if (!s.code.empty()) {
        body += "\n\n```\n" + s.code;
        if (s.code.back() != '\n') body += '\n';
        body += "```";
    }
    if (!s.explanation.empty()) body += "\n\n" + s.explanation;
    return body;
}

/// Chat history and the suggestion lifecycle for one client.
///
/// History is append-only. At most one group is current; a group with any
/// accepted suggestion is retained at its original position when the next
/// group is published, otherwise it is dropped.
class Session {
public:
    Session() = default;
    explicit Session(SessionConfig config) { state_.config = std::move(config); }

    const SessionState& state() const noexcept { return state_; }
    const std::vector<ChatMessage>& messages() const noexcept { return state_.messages; }
    const SessionConfig& config() const noexcept { return state_.config; }
    const SuggestionGroup* current_group() const {
        return state_.current ? &state_.current->group : nullptr;
    }

    PublishOutcome publish_group(SuggestionGroup group) {
        if (group.suggestions.empty() || group.suggestions.size() > kMaxGroupSize) {
            throw Error(ErrorCode::EmptyGroup, "group must hold 1 to 3 suggestions");
        }
        PublishOutcome outcome;
        if (state_.current) {
            if (state_.current->group.retained) {
                outcome.retained_group = state_.current->group.id;
                state_.retained_groups.push_back(std::move(*state_.current));
            } else {
                outcome.discarded_group = state_.current->group.id;
            }
        }
        group.retained = false;
        state_.current = AnchoredGroup{std::move(group), state_.messages.size()};
        return outcome;
    }

    /// Marks the suggestion accepted and appends it to the chat as an
    /// assistant message. Works on the current group and on retained groups.
    const ChatMessage& accept_suggestion(const std::string& suggestion_id, TimeMs at) {
        auto [group, suggestion] = locate(suggestion_id);
        if (!suggestion) throw Error(ErrorCode::UnknownSuggestion, suggestion_id);
        if (suggestion->state != SuggestionState::Temporary) {
            throw Error(ErrorCode::AlreadyResolved,
                        suggestion_id + " is already " + std::string(to_string(suggestion->state)));
        }
        suggestion->state = SuggestionState::Accepted;
        group->retained = true;
        state_.messages.push_back(
            ChatMessage{Role::Assistant, render_accepted(*suggestion), MessageOrigin::AcceptedSuggestion, at});
        return state_.messages.back();
    }

    /// Clears the current group. Its unresolved suggestions become dismissed;
    /// a group that already has an accepted suggestion stays in history.
    std::string dismiss_group() {
        if (!state_.current) throw Error(ErrorCode::NoCurrentGroup, "nothing to dismiss");
        auto current = std::move(*state_.current);
        state_.current.reset();
        for (auto& s : current.group.suggestions)
            if (s.state == SuggestionState::Temporary) s.state = SuggestionState::Dismissed;
        std::string id = current.group.id;
        if (current.group.retained) state_.retained_groups.push_back(std::move(current));
        return id;
    }

    void update_config(std::optional<TaskDescription> task, std::optional<TypeSet> enabled,
                       std::optional<std::string> model) {
        if (enabled && enabled->empty()) {
            throw Error(ErrorCode::EmptyTypeSet, "at least one suggestion type must be enabled");
        }
        if (task) state_.config.task = std::move(*task);
        if (enabled) state_.config.enabled = std::move(*enabled);
        if (model) state_.config.model = std::move(*model);
    }

    const ChatMessage& append_message(Role role, std::string body, TimeMs at) {
        state_.messages.push_back(ChatMessage{role, std::move(body), MessageOrigin::Typed, at});
        return state_.messages.back();
    }

private:
    std::pair<SuggestionGroup*, Suggestion*> locate(const std::string& id) {
        auto search = [&](SuggestionGroup& g) -> Suggestion* {
            for (auto& s : g.suggestions)
                if (s.id == id) return &s;
            return nullptr;
        };
        if (state_.current) {
            if (auto* s = search(state_.current->group)) return {&state_.current->group, s};
        }
        for (auto& r : state_.retained_groups) {
            if (auto* s = search(r.group)) return {&r.group, s};
        }
        return {nullptr, nullptr};
    }

    SessionState state_;
};

/// Append-only JSONL log of session mutations. Replaying it through
/// `restore` rebuilds the session after a crash.
class SessionJournal {
public:
    SessionJournal() = default;
    explicit SessionJournal(const std::filesystem::path& path) : out_(path, std::ios::app) {
        if (!out_) throw Error(ErrorCode::InvalidConfig, "cannot open session log " + path.string());
    }

    bool enabled() const { return out_.is_open(); }

    void message(const ChatMessage& m) { write({{"type", "message"}, {"message", to_json(m)}}); }
    void publish(const SuggestionGroup& g) { write({{"type", "publish"}, {"group", to_json(g)}}); }
    void accept(const std::string& id, TimeMs at) { write({{"type", "accept"}, {"id", id}, {"at", at}}); }
    void dismiss() { write({{"type", "dismiss"}}); }
    void config(const SessionConfig& c) {
        write({{"type", "config"},
               {"task", c.task.text()},
               {"taskSource", to_string(c.task.source())},
               {"enabled", to_json(c.enabled)},
               {"model", c.model}});
    }

    static Session restore(const std::filesystem::path& path) {
        Session session;
        std::ifstream in(path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded()) break; // torn final write
            const auto type = j.value("type", std::string{});
            if (type == "message") {
                auto m = message_from_json(j.at("message"));
                if (m.origin == MessageOrigin::Typed) session.append_message(m.role, m.body, m.at);
            } else if (type == "publish") {
                session.publish_group(group_from_json(j.at("group")));
            } else if (type == "accept") {
                session.accept_suggestion(j.at("id").get<std::string>(), j.value("at", TimeMs{0}));
            } else if (type == "dismiss") {
                session.dismiss_group();
            } else if (type == "config") {
                TypeSet enabled;
                for (const auto& t : j.at("enabled")) enabled.insert(resolve_type(t.get<std::string>()));
                session.update_config(
                    TaskDescription(j.value("task", std::string{}),
                                    parse_task_source(j.value("taskSource", std::string("user")))),
                    enabled, j.value("model", std::string("gpt-4o")));
            }
        }
        return session;
    }

private:
    void write(const nlohmann::json& j) {
        if (!out_.is_open()) return;
        out_ << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
        out_.flush();
    }

    std::ofstream out_;
};

} // namespace genie
