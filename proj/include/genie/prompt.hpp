#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "genie/chat.hpp"
#include "genie/error.hpp"
#include "genie/prompt_assets_embedded.hpp"
#include "genie/suggestion_type.hpp"
#include "genie/workspace.hpp"

namespace genie {

inline constexpr std::string_view kCursorSentinel = "<|cursor|>";
inline constexpr std::size_t kMaxTaskChars = 8000;
inline constexpr std::size_t kDefaultHistoryMessages = 10;

enum class TaskSource { User, ImportedTicket };

constexpr std::string_view to_string(TaskSource s) noexcept {
    return s == TaskSource::User ? "user" : "imported-ticket";
}

inline TaskSource parse_task_source(std::string_view s) {
    if (s == "user") return TaskSource::User;
    if (s == "imported-ticket") return TaskSource::ImportedTicket;
    throw Error(ErrorCode::InvalidConfig, "unknown task source '" + std::string(s) + "'");
}

/// Free-form goal text. Stored verbatim; anything over the cap is rejected.
class TaskDescription {
public:
    TaskDescription() = default;
    explicit TaskDescription(std::string text, TaskSource source = TaskSource::User)
        : text_(std::move(text)), source_(source) {
        if (text_.size() > kMaxTaskChars) {
            throw Error(ErrorCode::TaskTooLong, "task description has " + std::to_string(text_.size()) +
                                                    " characters, limit is " + std::to_string(kMaxTaskChars));
        }
    }

    const std::string& text() const noexcept { return text_; }
    TaskSource source() const noexcept { return source_; }
    bool empty() const noexcept { return text_.empty(); }

    friend bool operator==(const TaskDescription&, const TaskDescription&) = default;

private:
    std::string text_;
    TaskSource source_ = TaskSource::User;
};

namespace section {
inline constexpr std::string_view kSystemPreamble = "system-preamble";
inline constexpr std::string_view kFormatInstructions = "format-instructions";
inline constexpr std::string_view kOneShotExample = "one-shot-example";
inline constexpr std::string_view kEnabledTypes = "enabled-types";
inline constexpr std::string_view kTaskDescription = "task-description";
inline constexpr std::string_view kChatHistory = "chat-history";
inline constexpr std::string_view kCodeContext = "code-context";
} // namespace section

struct PromptSection {
    std::string id;
    std::string text;

    friend bool operator==(const PromptSection&, const PromptSection&) = default;
};

struct PromptBundle {
    std::vector<PromptSection> sections;
    std::string model;
    TypeSet enabled;

    const PromptSection* find(std::string_view id) const {
        for (const auto& s : sections)
            if (s.id == id) return &s;
        return nullptr;
    }

    /// Everything after the preamble, as one user-facing document.
    std::string render_body() const {
        std::string out;
        for (const auto& s : sections) {
            if (s.id == section::kSystemPreamble) continue;
            if (!out.empty()) out += "\n\n";
            out += "## " + s.id + "\n";
            out += s.text;
        }
        return out;
    }

    std::string render() const {
        std::string out;
        if (const auto* pre = find(section::kSystemPreamble)) out = pre->text + "\n\n";
        return out + render_body();
    }

    std::size_t char_count() const {
        std::size_t n = 0;
        for (const auto& s : sections) n += s.text.size();
        return n;
    }

    friend bool operator==(const PromptBundle&, const PromptBundle&) = default;
};

struct PromptAssets {
    std::string system_preamble;
    std::string format_instructions;
    std::string one_shot_example;

    static PromptAssets packaged() {
        return PromptAssets{std::string(assets::kSystemPreamble), std::string(assets::kFormatInstructions),
                            std::string(assets::kOneShotExample)};
    }

    /// Loads the three asset files from `dir`. Missing files fall back to the
    /// packaged copy so a partial override directory works.
    static PromptAssets load(const std::filesystem::path& dir) {
        auto assets = packaged();
        auto read = [&](const char* name, std::string& slot) {
            std::ifstream in(dir / name, std::ios::binary);
            if (!in) return;
            std::ostringstream ss;
            ss << in.rdbuf();
            slot = ss.str();
        };
        read("system_preamble.txt", assets.system_preamble);
        read("format_instructions.txt", assets.format_instructions);
        read("one_shot_example.txt", assets.one_shot_example);
        return assets;
    }
};

struct PromptConfig {
    std::size_t history_messages = kDefaultHistoryMessages;
    std::string model = "gpt-4o";
};

namespace detail {

inline std::string render_enabled_types(const TypeSet& enabled) {
    std::string out = "Only offer suggestions of these types:\n";
    for (auto t : kAllSuggestionTypes) {
        if (!enabled.count(t)) continue;
        out += "- ";
        out += display_label(t);
        out += " (tag: \"";
        out += canonical_id(t);
        out += "\")\n";
    }
    return out;
}

inline std::string render_history(const std::vector<ChatMessage>& history, std::size_t limit) {
    const std::size_t first = history.size() > limit ? history.size() - limit : 0;
    std::string out;
    for (std::size_t i = first; i < history.size(); ++i) {
        if (!out.empty()) out += "\n";
        out += to_string(history[i].role);
        out += ": ";
        out += history[i].body;
    }
    return out;
}

} // namespace detail

/// Text of the code-context section; the sentinel sits at offset len(before).
inline std::string render_code_context(const CodeContext& ctx) {
    return ctx.before + std::string(kCursorSentinel) + ctx.after;
}

inline PromptBundle build_prompt(const CodeContext& ctx, const std::vector<ChatMessage>& history,
                                 const TaskDescription& task, const TypeSet& enabled, const PromptConfig& cfg,
                                 const PromptAssets& assets) {
    if (enabled.empty()) throw Error(ErrorCode::EmptyTypeSet, "at least one suggestion type must be enabled");

    PromptBundle bundle;
    bundle.model = cfg.model;
    bundle.enabled = enabled;
    auto add = [&](std::string_view id, std::string text) {
        bundle.sections.push_back(PromptSection{std::string(id), std::move(text)});
    };
    add(section::kSystemPreamble, assets.system_preamble);
    add(section::kFormatInstructions, assets.format_instructions);
    add(section::kOneShotExample, assets.one_shot_example);
    add(section::kEnabledTypes, detail::render_enabled_types(enabled));
    if (!task.empty()) add(section::kTaskDescription, task.text());
    if (cfg.history_messages > 0 && !history.empty()) {
        add(section::kChatHistory, detail::render_history(history, cfg.history_messages));
    }
    add(section::kCodeContext, render_code_context(ctx));
    return bundle;
}

inline PromptBundle build_prompt(const CodeContext& ctx, const std::vector<ChatMessage>& history,
                                 const TaskDescription& task, const TypeSet& enabled,
                                 const PromptConfig& cfg = {}) {
    return build_prompt(ctx, history, task, enabled, cfg, PromptAssets::packaged());
}

} // namespace genie
