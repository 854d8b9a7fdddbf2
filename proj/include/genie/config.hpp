#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "genie/cost.hpp"
#include "genie/error.hpp"
#include "genie/prompt.hpp"
#include "genie/scheduler.hpp"
#include "genie/suggestion_type.hpp"
#include "genie/workspace.hpp"

namespace genie {

/// Everything read from the daemon config document. Keys may be nested
/// objects ({"scheduler": {"t_code_quiet_ms": 5000}}) or dotted names
/// ({"scheduler.t_code_quiet_ms": 5000}).
struct DaemonConfig {
    SchedulerConfig scheduler;
    std::size_t context_window = kDefaultContextWindow;

    std::size_t history_messages = kDefaultHistoryMessages;
    std::optional<std::filesystem::path> assets_dir;
    AliasTable aliases;

    std::string model = "gpt-4o";
    std::string base_url = "https://api.openai.com/v1";
    std::int64_t timeout_ms = 30000;
    std::int64_t max_output_tokens = 1024;
    std::uint64_t mock_seed = 42;
    bool use_mock = false;
    /// Virtual latency of the mock provider in replay, milliseconds.
    std::int64_t mock_latency_ms = 0;

    std::optional<std::filesystem::path> pricing_table_path;
    std::string autocomplete_model = "codestral";

    std::optional<std::filesystem::path> session_log_path;
    bool enable_replay_inject = false;

    PricingTable pricing() const {
        return pricing_table_path ? PricingTable::load(*pricing_table_path) : PricingTable::defaults();
    }

    PromptAssets assets() const {
        return assets_dir ? PromptAssets::load(*assets_dir) : PromptAssets::packaged();
    }

    static DaemonConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base = {}) {
        if (!doc.is_object()) throw Error(ErrorCode::InvalidConfig, "config document must be a JSON object");
        DaemonConfig c;
        auto lookup = [&](std::string_view dotted) -> const nlohmann::json* {
            if (auto it = doc.find(std::string(dotted)); it != doc.end()) return &*it;
            const nlohmann::json* node = &doc;
            std::string_view rest = dotted;
            while (!rest.empty()) {
                const auto dot = rest.find('.');
                const std::string key(rest.substr(0, dot));
                if (!node->is_object()) return nullptr;
                auto it = node->find(key);
                if (it == node->end()) return nullptr;
                node = &*it;
                rest = dot == std::string_view::npos ? std::string_view{} : rest.substr(dot + 1);
            }
            return node;
        };
        auto path_of = [&](const nlohmann::json& j) {
            std::filesystem::path p = j.get<std::string>();
            return p.is_relative() && !base.empty() ? base / p : p;
        };

        try {
            if (auto* v = lookup("scheduler.t_code_quiet_ms")) c.scheduler.t_code_quiet = v->get<TimeMs>();
            if (auto* v = lookup("scheduler.t_chat_quiet_ms")) c.scheduler.t_chat_quiet = v->get<TimeMs>();
            if (auto* v = lookup("context.window_chars")) c.context_window = v->get<std::size_t>();
            if (auto* v = lookup("prompt.history_messages")) c.history_messages = v->get<std::size_t>();
            if (auto* v = lookup("prompt.assets_dir")) c.assets_dir = path_of(*v);
            if (auto* v = lookup("prompt.aliases")) {
                for (const auto& [alias, canonical] : v->items()) {
                    c.aliases.add(alias, resolve_type(canonical.get<std::string>()));
                }
            }
            if (auto* v = lookup("provider.model")) c.model = v->get<std::string>();
            if (auto* v = lookup("provider.base_url")) c.base_url = v->get<std::string>();
            if (auto* v = lookup("provider.timeout_ms")) c.timeout_ms = v->get<std::int64_t>();
            if (auto* v = lookup("provider.max_output_tokens")) c.max_output_tokens = v->get<std::int64_t>();
            if (auto* v = lookup("provider.mock_seed")) c.mock_seed = v->get<std::uint64_t>();
            if (auto* v = lookup("provider.mock")) c.use_mock = v->get<bool>();
            if (auto* v = lookup("provider.mock_latency_ms")) c.mock_latency_ms = v->get<std::int64_t>();
            if (auto* v = lookup("pricing.table_path")) c.pricing_table_path = path_of(*v);
            if (auto* v = lookup("pricing.autocomplete_model")) c.autocomplete_model = v->get<std::string>();
            if (auto* v = lookup("session.log_path")) c.session_log_path = path_of(*v);
            if (auto* v = lookup("rpc.enable_replay_inject")) c.enable_replay_inject = v->get<bool>();
        } catch (const nlohmann::json::exception& ex) {
            throw Error(ErrorCode::InvalidConfig, ex.what());
        }
        if (doc.contains("provider.api_key") ||
            (doc.contains("provider") && doc["provider"].is_object() && doc["provider"].contains("api_key"))) {
            throw Error(ErrorCode::InvalidConfig, "API keys are read from GENIED_API_KEY, not the config file");
        }
        c.scheduler.validate();
        if (c.context_window == 0) throw Error(ErrorCode::InvalidConfig, "context.window_chars must be positive");
        if (c.mock_latency_ms < 0) throw Error(ErrorCode::InvalidConfig, "provider.mock_latency_ms is negative");
        return c;
    }

    static DaemonConfig load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open config " + path.string());
        auto doc = nlohmann::json::parse(in, nullptr, false);
        if (doc.is_discarded()) throw Error(ErrorCode::InvalidConfig, path.string() + " is not valid JSON");
        return from_json(doc, path.parent_path());
    }
};

} // namespace genie
