#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "genie/error.hpp"
#include "genie/prompt.hpp"
#include "genie/suggestion_type.hpp"

namespace genie {

/// Shared cancellation flag. Copies observe the same signal.
class CancellationToken {
public:
    CancellationToken() : state_(std::make_shared<State>()) {}

    void cancel() const {
        {
            std::lock_guard lock(state_->mutex);
            state_->cancelled = true;
        }
        state_->cv.notify_all();
    }

    bool cancelled() const {
        std::lock_guard lock(state_->mutex);
        return state_->cancelled;
    }

    /// Sleeps up to `d`; returns true early if cancelled.
    template <class Rep, class Period>
    bool wait_for(std::chrono::duration<Rep, Period> d) const {
        std::unique_lock lock(state_->mutex);
        return state_->cv.wait_for(lock, d, [&] { return state_->cancelled; });
    }

private:
    struct State {
        std::mutex mutex;
        std::condition_variable cv;
        bool cancelled = false;
    };
    std::shared_ptr<State> state_;
};

struct Usage {
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    bool estimated = false;

    friend bool operator==(const Usage&, const Usage&) = default;
};

struct ProviderRequest {
    PromptBundle bundle;
    std::string model;
    std::int64_t max_output_tokens = 1024;
    CancellationToken cancel;
};

struct ProviderResponse {
    std::string raw_text;
    Usage usage;
    std::int64_t latency_ms = 0;
};

/// ceil(chars / 4), the fallback when a provider reports no usage.
constexpr std::int64_t estimate_tokens(std::size_t chars) noexcept {
    return static_cast<std::int64_t>((chars + 3) / 4);
}

class Provider {
public:
    virtual ~Provider() = default;

    /// Exactly one outcome: a response or an error (Cancelled included).
    virtual Result<ProviderResponse> complete(const ProviderRequest& request) = 0;

    virtual std::string name() const = 0;
};

/// 64-bit FNV-1a; stable across platforms so mock output is reproducible.
constexpr std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t bundle_hash(const PromptBundle& bundle) {
    std::uint64_t h = fnv1a(bundle.model);
    for (const auto& s : bundle.sections) {
        h = fnv1a(s.id, h);
        h = fnv1a(std::string_view("\x1f", 1), h);
        h = fnv1a(s.text, h);
        h = fnv1a(std::string_view("\x1e", 1), h);
    }
    return h;
}

/// Deterministic stand-in for a model: the reply depends only on the seed and
/// the bundle. Always a three-item JSON array using enabled tags only.
class MockProvider : public Provider {
public:
    explicit MockProvider(std::uint64_t seed = 42) : seed_(seed) {}

    Result<ProviderResponse> complete(const ProviderRequest& request) override {
        if (request.cancel.cancelled()) return make_error(ErrorCode::Cancelled, "cancelled before dispatch");
        ProviderResponse response;
        response.raw_text = generate(request.bundle);
        response.usage = Usage{estimate_tokens(request.bundle.char_count()),
                               estimate_tokens(response.raw_text.size()), false};
        return response;
    }

    std::string name() const override { return "mock"; }

    std::string generate(const PromptBundle& bundle) const {
        std::mt19937_64 rng(seed_ ^ bundle_hash(bundle));
        if (!bundle.find(section::kFormatInstructions)) return chat_reply(bundle, rng());
        std::vector<SuggestionType> pool(bundle.enabled.begin(), bundle.enabled.end());
        if (pool.empty()) pool.assign(kAllSuggestionTypes.begin(), kAllSuggestionTypes.end());
        std::shuffle(pool.begin(), pool.end(), rng);

        std::string focus = "the code near the cursor";
        if (const auto* ctx = bundle.find(section::kCodeContext)) focus = first_identifier(ctx->text, focus);

        auto arr = nlohmann::json::array();
        for (std::size_t i = 0; i < 3; ++i) {
            const auto type = pool[i % pool.size()];
            const auto variant = static_cast<unsigned>(rng() % 3);
            arr.push_back({{"tag", canonical_id(type)},
                           {"description", describe(type, variant, focus)},
                           {"code", "// " + std::string(canonical_id(type)) + " for " + focus},
                           {"explanation", explain(type)}});
        }
        return arr.dump(2);
    }

private:
    // Plain-text answer for ordinary chat bundles (no suggestion format requested).
    static std::string chat_reply(const PromptBundle& bundle, std::uint64_t salt) {
        static constexpr std::string_view openers[] = {"Good question.", "Sure.", "Here is a thought."};
        std::string last;
        if (const auto* h = bundle.find(section::kChatHistory)) {
            const auto nl = h->text.rfind('\n');
            last = nl == std::string::npos ? h->text : h->text.substr(nl + 1);
        }
        return std::string(openers[salt % 3]) + " (mock reply to: " + last + ")";
    }

    static std::string first_identifier(std::string_view text, std::string fallback) {
        std::size_t i = 0;
        auto is_start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
        auto is_part = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
        while (i < text.size()) {
            if (is_start(text[i])) {
                std::size_t j = i;
                while (j < text.size() && is_part(text[j])) ++j;
                auto word = text.substr(i, j - i);
                if (word.size() > 2 && word != "def" && word != "class" && word != "return" &&
                    word != "int" && word != "void" && word != "const") {
                    return "`" + std::string(word) + "`";
                }
                i = j;
            } else {
                ++i;
            }
        }
        return fallback;
    }

    static std::string describe(SuggestionType type, unsigned variant, const std::string& focus) {
        static constexpr std::string_view verbs[6][3] = {
            {"Simplify", "Tighten the control flow in", "Reduce duplication around"},
            {"Explain the purpose of", "Walk through the data flow of", "Summarize the contract of"},
            {"Consider extending", "Brainstorm a feature building on", "Think about a new use for"},
            {"Add a unit test for", "Cover the edge cases of", "Write a regression test around"},
            {"Check for an off-by-one in", "Guard against empty input in", "Handle the error path of"},
            {"Use a range-based loop in", "Prefer const references in", "Mark helpers noexcept in"},
        };
        const auto row = static_cast<std::size_t>(type);
        return std::string(verbs[row][variant % 3]) + " " + focus + ".";
    }

    static std::string explain(SuggestionType type) {
        switch (type) {
        case SuggestionType::Improvement: return "Smaller code is easier to review and maintain.";
        case SuggestionType::Explanation: return "Understanding this piece makes the next change safer.";
        case SuggestionType::Brainstorm: return "A natural next step for the current code.";
        case SuggestionType::Test: return "Tests pin the current behaviour before further edits.";
        case SuggestionType::BugFix: return "This input would currently produce a wrong result.";
        case SuggestionType::SyntaxHint: return "The idiomatic form is shorter and clearer.";
        }
        return "";
    }

    std::uint64_t seed_;
};

/// Replays a fixed queue of outcomes; for tests that need failures on cue.
class ScriptedProvider : public Provider {
public:
    void push(Result<ProviderResponse> outcome) { outcomes_.push_back(std::move(outcome)); }

    void push_text(std::string raw, Usage usage = {}) {
        outcomes_.push_back(ProviderResponse{std::move(raw), usage, 0});
    }

    Result<ProviderResponse> complete(const ProviderRequest& request) override {
        ++calls_;
        requests_.push_back(request.bundle);
        if (request.cancel.cancelled()) return make_error(ErrorCode::Cancelled, "cancelled before dispatch");
        if (outcomes_.empty()) return make_error(ErrorCode::HttpError, "script exhausted", 500);
        auto next = std::move(outcomes_.front());
        outcomes_.pop_front();
        return next;
    }

    std::string name() const override { return "scripted"; }
    std::size_t calls() const noexcept { return calls_; }
    const std::vector<PromptBundle>& requests() const noexcept { return requests_; }

private:
    std::deque<Result<ProviderResponse>> outcomes_;
    std::vector<PromptBundle> requests_;
    std::size_t calls_ = 0;
};

} // namespace genie
