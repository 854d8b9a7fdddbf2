#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "genie/error.hpp"
#include "genie/provider.hpp"

namespace genie {

struct HttpProviderConfig {
    /// e.g. "https://api.openai.com/v1"; the request goes to <base_url>/chat/completions.
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key;
    std::chrono::milliseconds timeout{30000};
    std::chrono::milliseconds retry_backoff{1000};

    /// Reads the key from GENIED_API_KEY. Keys never come from config files.
    static std::string api_key_from_env() {
        const char* key = std::getenv("GENIED_API_KEY");
        return key ? std::string(key) : std::string();
    }
};

namespace detail {

struct SplitUrl {
    std::string origin; // scheme://host[:port]
    std::string path;   // always starts with '/'
};

inline SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    const auto path_start = url.find('/', host_start);
    if (path_start == std::string::npos) return {url, "/"};
    std::string path = url.substr(path_start);
    while (path.size() > 1 && path.back() == '/') path.pop_back();
    return {url.substr(0, path_start), path};
}

struct HttpAttempt {
    int status = 0; // 0: transport failure
    std::string body;
    std::string transport_error;
    bool timed_out = false;
};

} // namespace detail

/// OpenAI-style chat-completions client.
///
/// Each attempt runs on its own detached worker so that a cancellation or
/// timeout returns to the caller immediately; the worker finishes on its own
/// once the socket times out. One retry on 5xx/429.
class HttpProvider : public Provider {
public:
    explicit HttpProvider(HttpProviderConfig cfg) : cfg_(std::move(cfg)) {}

    std::string name() const override { return "http"; }

    Result<ProviderResponse> complete(const ProviderRequest& request) override {
        if (request.cancel.cancelled()) return make_error(ErrorCode::Cancelled, "cancelled before dispatch");

        const auto started = std::chrono::steady_clock::now();
        const auto body = request_body(request);
        const std::size_t prompt_chars = request.bundle.char_count();

        std::optional<detail::HttpAttempt> attempt;
        for (int i = 0; i < 2; ++i) {
            auto outcome = run_attempt(body, request.cancel);
            if (!outcome.ok()) return outcome.error();
            attempt = std::move(outcome.value());
            const bool transient = attempt->status == 429 || (attempt->status >= 500 && attempt->status < 600);
            if (!transient || i == 1) break;
            if (request.cancel.wait_for(cfg_.retry_backoff)) {
                return make_error(ErrorCode::Cancelled, "cancelled during retry backoff");
            }
        }

        if (attempt->status == 0) return make_error(ErrorCode::HttpError, attempt->transport_error, 0);
        if (attempt->status == 429) return make_error(ErrorCode::RateLimited, "provider rate limit", 429);
        if (attempt->status < 200 || attempt->status >= 300) {
            return make_error(ErrorCode::HttpError, "provider returned " + std::to_string(attempt->status),
                              attempt->status);
        }

        auto doc = nlohmann::json::parse(attempt->body, nullptr, false);
        if (doc.is_discarded()) return make_error(ErrorCode::HttpError, "provider body is not JSON", attempt->status);

        ProviderResponse response;
        try {
            response.raw_text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            return make_error(ErrorCode::HttpError, "provider body has no choices[0].message.content",
                              attempt->status);
        }
        const auto usage = doc.find("usage");
        if (usage != doc.end() && usage->is_object() && usage->contains("prompt_tokens") &&
            usage->contains("completion_tokens")) {
            response.usage = Usage{usage->at("prompt_tokens").get<std::int64_t>(),
                                   usage->at("completion_tokens").get<std::int64_t>(), false};
        } else {
            response.usage = Usage{estimate_tokens(prompt_chars), estimate_tokens(response.raw_text.size()), true};
        }
        response.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                  std::chrono::steady_clock::now() - started)
                                  .count();
        return response;
    }

    static nlohmann::json request_body(const ProviderRequest& request) {
        std::string system;
        if (const auto* pre = request.bundle.find(section::kSystemPreamble)) system = pre->text;
        return {{"model", request.model.empty() ? request.bundle.model : request.model},
                {"max_tokens", request.max_output_tokens},
                {"messages",
                 nlohmann::json::array({{{"role", "system"}, {"content", system}},
                                        {{"role", "user"}, {"content", request.bundle.render_body()}}})}};
    }

private:
    struct Shared {
        std::mutex mutex;
        std::condition_variable cv;
        std::optional<detail::HttpAttempt> result;
    };

    Result<detail::HttpAttempt> run_attempt(const nlohmann::json& body, const CancellationToken& cancel) {
        auto shared = std::make_shared<Shared>();
        auto url = detail::split_url(cfg_.base_url);
        std::thread([shared, url, payload = body.dump(), key = cfg_.api_key, timeout = cfg_.timeout] {
            detail::HttpAttempt attempt;
            try {
                httplib::Client client(url.origin);
                const auto secs = static_cast<time_t>(timeout.count() / 1000);
                const auto usecs = static_cast<time_t>((timeout.count() % 1000) * 1000);
                client.set_connection_timeout(secs, usecs);
                client.set_read_timeout(secs, usecs);
                client.set_write_timeout(secs, usecs);
                httplib::Headers headers;
                if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);
                const std::string path = (url.path == "/" ? std::string() : url.path) + "/chat/completions";
                if (auto res = client.Post(path, headers, payload, "application/json")) {
                    attempt.status = res->status;
                    attempt.body = res->body;
                } else {
                    attempt.transport_error = httplib::to_string(res.error());
                    attempt.timed_out =
                        res.error() == httplib::Error::Read || res.error() == httplib::Error::ConnectionTimeout;
                }
            } catch (const std::exception& ex) {
                attempt.transport_error = ex.what();
            }
            {
                std::lock_guard lock(shared->mutex);
                shared->result = std::move(attempt);
            }
            shared->cv.notify_all();
        }).detach();

        // Poll the cancel flag in short slices so a signal is honoured quickly.
        const auto deadline = std::chrono::steady_clock::now() + cfg_.timeout;
        std::unique_lock lock(shared->mutex);
        while (!shared->result) {
            if (cancel.cancelled()) return make_error(ErrorCode::Cancelled, "cancelled in flight");
            if (std::chrono::steady_clock::now() >= deadline) {
                return make_error(ErrorCode::Timeout, "no response within " + std::to_string(cfg_.timeout.count()) + " ms");
            }
            shared->cv.wait_for(lock, std::chrono::milliseconds(10));
        }
        auto attempt = std::move(*shared->result);
        if (attempt.status == 0 && attempt.timed_out) {
            return make_error(ErrorCode::Timeout, attempt.transport_error);
        }
        return attempt;
    }

    HttpProviderConfig cfg_;
};

} // namespace genie
