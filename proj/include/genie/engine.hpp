#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "genie/config.hpp"
#include "genie/cost.hpp"
#include "genie/error.hpp"
#include "genie/json_codec.hpp"
#include "genie/parser.hpp"
#include "genie/prompt.hpp"
#include "genie/provider.hpp"
#include "genie/rpc.hpp"
#include "genie/scheduler.hpp"
#include "genie/session.hpp"
#include "genie/workspace.hpp"

namespace genie {

struct EngineStats {
    std::vector<TimeMs> fire_times;
    std::vector<TimeMs> publish_times;
    std::size_t manual_fires = 0;
    std::size_t published = 0;
    std::size_t cancelled = 0;
    std::size_t failed = 0;
    std::size_t regenerations = 0;
    std::size_t code_changes = 0;
    std::size_t chat_requests = 0;
    std::size_t rpc_errors = 0;
    TokenCount proactive_input_tokens = 0;
    TokenCount proactive_output_tokens = 0;
    std::vector<std::string> parse_warnings;

    std::size_t proactive_requests() const noexcept { return fire_times.size(); }
};

/// One client session: workspace mirror, scheduler, chat session and cost
/// ledger behind the JSON-RPC method table.
///
/// The engine never reads a clock. Hosts pass the current monotonic time
/// with every call and use `next_deadline()` to know when to call
/// `advance()` again. Without an async dispatcher, provider calls run inline
/// and their results land `mock_latency_ms` later on the same virtual clock.
class Engine {
public:
    using json = nlohmann::json;
    using CallId = std::uint64_t;
    using AsyncDispatch = std::function<void(CallId, ProviderRequest)>;

    Engine(DaemonConfig cfg, std::shared_ptr<Provider> provider, std::string session_id = "session-1",
           AsyncDispatch async = {})
        : cfg_(std::move(cfg))
        , provider_(std::move(provider))
        , async_(std::move(async))
        , session_id_(std::move(session_id))
        , scheduler_(cfg_.scheduler)
        , assets_(cfg_.assets())
        , ledger_(cfg_.pricing()) {
        SessionConfig sc;
        sc.model = cfg_.model;
        session_ = Session(std::move(sc));
        if (cfg_.session_log_path) {
            if (std::filesystem::exists(*cfg_.session_log_path)) {
                session_ = SessionJournal::restore(*cfg_.session_log_path);
            }
            journal_ = SessionJournal(*cfg_.session_log_path);
        }
    }

    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    // --- inputs ---------------------------------------------------------

    /// Raw frame text. Malformed JSON yields a -32700 error response.
    std::vector<json> handle_frame(std::string_view body, TimeMs now) {
        auto msg = json::parse(body, nullptr, false);
        if (msg.is_discarded()) {
            ++stats_.rpc_errors;
            return {rpc::make_error(nullptr, rpc::kParseError, "Parse error")};
        }
        return handle(msg, now);
    }

    std::vector<json> handle(const json& msg, TimeMs now) {
        Out out;
        advance_into(out, now);
        if (msg.is_array()) {
            if (msg.empty()) {
                out.push_back(rpc::make_error(nullptr, rpc::kInvalidRequest, "empty batch"));
                return out;
            }
            auto responses = json::array();
            for (const auto& item : msg) {
                Out inner;
                dispatch_one(inner, item, now);
                for (auto& m : inner) {
                    if (m.contains("method")) out.push_back(std::move(m));
                    else responses.push_back(std::move(m));
                }
            }
            if (!responses.empty()) out.push_back(std::move(responses));
            return out;
        }
        dispatch_one(out, msg, now);
        return out;
    }

    /// Processes due provider results and scheduler deadlines up to `now`.
    std::vector<json> advance(TimeMs now) {
        Out out;
        advance_into(out, now);
        return out;
    }

    /// Async hosts deliver provider outcomes here.
    std::vector<json> on_provider_result(CallId id, Result<ProviderResponse> result, TimeMs now) {
        Out out;
        advance_into(out, now);
        complete_call(out, id, std::move(result), now);
        return out;
    }

    std::optional<TimeMs> next_deadline() const {
        std::optional<TimeMs> next = scheduler_.next_fire_time();
        for (const auto& p : pending_) {
            if (!next || p.due < *next) next = p.due;
        }
        return next;
    }

    /// Delivers every queued synchronous result regardless of due time.
    std::vector<json> drain() {
        Out out;
        while (!pending_.empty()) {
            auto due = pending_.front().due;
            for (const auto& p : pending_) due = std::min(due, p.due);
            advance_into(out, std::max(due, last_time_));
        }
        return out;
    }

    // --- observers ------------------------------------------------------

    const Session& session() const noexcept { return session_; }
    const Workspace& workspace() const noexcept { return workspace_; }
    const Scheduler& scheduler() const noexcept { return scheduler_; }
    const CostLedger& ledger() const noexcept { return ledger_; }
    const EngineStats& stats() const noexcept { return stats_; }
    const DaemonConfig& config() const noexcept { return cfg_; }
    const std::string& session_id() const noexcept { return session_id_; }
    bool initialized() const noexcept { return initialized_; }
    bool shutdown_requested() const noexcept { return shutdown_; }
    bool request_in_flight() const noexcept { return active_.has_value(); }

    json session_state_json() const {
        const auto& st = session_.state();
        auto messages = json::array();
        for (const auto& m : st.messages) messages.push_back(to_json(m));
        auto retained = json::array();
        for (const auto& r : st.retained_groups) retained.push_back({{"group", to_json(r.group)}, {"anchor", r.anchor}});
        json current = nullptr;
        if (st.current) current = {{"group", to_json(st.current->group)}, {"anchor", st.current->anchor}};
        return {{"messages", messages},
                {"current", current},
                {"retained", retained},
                {"config", config_json()},
                {"cost", ledger_.totals_json()}};
    }

private:
    using Out = std::vector<json>;

    struct InvalidParams : std::runtime_error {
        using std::runtime_error::runtime_error;
    };

    enum class CallKind { Proactive, Chat };

    struct Call {
        CallKind kind;
        std::uint64_t cycle = 0;
        int attempt = 1;
        PromptBundle bundle;
        CancellationToken cancel;
    };

    struct Active {
        std::uint64_t cycle;
        CallId call;
    };

    struct Pending {
        TimeMs due;
        CallId call;
        Result<ProviderResponse> result;
    };

    // --- time -----------------------------------------------------------

    void advance_into(Out& out, TimeMs now) {
        for (;;) {
            std::optional<TimeMs> fire = scheduler_.next_fire_time();
            if (fire && *fire > now) fire.reset();
            auto due_it = pending_.end();
            for (auto it = pending_.begin(); it != pending_.end(); ++it) {
                if (it->due <= now && (due_it == pending_.end() || it->due < due_it->due)) due_it = it;
            }
            if (due_it != pending_.end() && (!fire || due_it->due <= *fire)) {
                Pending p = std::move(*due_it);
                pending_.erase(due_it);
                touch(p.due);
                complete_call(out, p.call, std::move(p.result), p.due);
                continue;
            }
            if (fire) {
                touch(*fire);
                if (scheduler_.tick(*fire) == SchedulerAction::FireRequest) start_cycle(*fire);
                continue;
            }
            break;
        }
        touch(now);
    }

    void touch(TimeMs t) { last_time_ = std::max(last_time_, t); }

    // --- provider calls -------------------------------------------------

    CallId dispatch_call(Call call, TimeMs now) {
        const CallId id = next_call_++;
        ProviderRequest req{call.bundle, call.bundle.model, cfg_.max_output_tokens, call.cancel};
        calls_.emplace(id, std::move(call));
        if (async_) {
            async_(id, std::move(req));
        } else {
            pending_.push_back(Pending{now + cfg_.mock_latency_ms, id, provider_->complete(req)});
        }
        return id;
    }

    void start_cycle(TimeMs now) {
        const std::uint64_t cycle = ++cycle_counter_;
        stats_.fire_times.push_back(now);
        auto snap = workspace_.snapshot();
        if (!snap) {
            ++stats_.failed;
            scheduler_.on_event(EventKind::RequestFailed, now);
            return;
        }
        const auto& sc = session_.config();
        const auto ctx = extract_context(snap->document, snap->cursor, cfg_.context_window);
        PromptConfig pc{cfg_.history_messages, sc.model};
        Call call{CallKind::Proactive, cycle, 1, build_prompt(ctx, session_.messages(), sc.task, sc.enabled, pc, assets_),
                  CancellationToken{}};
        const CallId id = dispatch_call(std::move(call), now);
        active_ = Active{cycle, id};
    }

    void cancel_active() {
        if (!active_) return;
        auto it = calls_.find(active_->call);
        if (it != calls_.end()) {
            it->second.cancel.cancel();
            calls_.erase(it);
        }
        active_.reset();
        ++stats_.cancelled;
    }

    void complete_call(Out& out, CallId id, Result<ProviderResponse> result, TimeMs now) {
        auto it = calls_.find(id);
        if (it == calls_.end()) return; // cancelled or unknown: dropped
        Call call = std::move(it->second);
        calls_.erase(it);

        if (result.ok()) {
            const auto& usage = result->usage;
            ledger_.record(call.bundle.model, usage.input_tokens, usage.output_tokens, usage.estimated);
            out.push_back(rpc::make_notification("cost/updated", ledger_.totals_json()));
        }

        if (call.kind == CallKind::Chat) {
            if (!result.ok()) {
                out.push_back(rpc::make_notification(
                    "chat/replyFailed", {{"kind", to_string(result.error().code)}, {"message", result.error().message}}));
                return;
            }
            append_message(out, Role::Assistant, result->raw_text, now);
            return;
        }

        // proactive
        if (!active_ || active_->call != id) return;
        if (result.ok()) {
            stats_.proactive_input_tokens += result->usage.input_tokens;
            stats_.proactive_output_tokens += result->usage.output_tokens;
        }
        if (!result.ok()) {
            finish_failed(now);
            return;
        }
        auto parsed = parse_response(result->raw_text, call.bundle.enabled, "g" + std::to_string(call.cycle), now,
                                     cfg_.aliases);
        if (!parsed.ok()) {
            if (parsed.error().code == ErrorCode::ParseFailure && call.attempt == 1) {
                ++stats_.regenerations;
                call.attempt = 2;
                call.cancel = CancellationToken{};
                active_->call = dispatch_call(std::move(call), now);
                return;
            }
            finish_failed(now);
            return;
        }
        for (auto& w : parsed->warnings) stats_.parse_warnings.push_back(std::move(w));
        publish(out, std::move(parsed->group), now);
    }

    void finish_failed(TimeMs now) {
        active_.reset();
        ++stats_.failed;
        scheduler_.on_event(EventKind::RequestFailed, now);
    }

    void publish(Out& out, SuggestionGroup group, TimeMs now) {
        active_.reset();
        ++stats_.published;
        stats_.publish_times.push_back(now);
        journal_.publish(group);
        const auto outcome = session_.publish_group(std::move(group));
        scheduler_.on_event(EventKind::RequestCompleted, now);
        if (outcome.discarded_group) {
            out.push_back(rpc::make_notification("suggestions/cleared", {{"groupId", *outcome.discarded_group}}));
        }
        const auto& cur = *session_.state().current;
        out.push_back(rpc::make_notification("suggestions/published",
                                             {{"group", to_json(cur.group)}, {"anchor", cur.anchor}}));
    }

    void append_message(Out& out, Role role, std::string body, TimeMs now) {
        const auto& m = session_.append_message(role, std::move(body), now);
        journal_.message(m);
        out.push_back(rpc::make_notification(
            "chat/messageAppended", {{"message", to_json(m)}, {"index", session_.messages().size() - 1}}));
    }

    void scheduler_event(Out& out, EventKind kind, TimeMs now) {
        const auto action = scheduler_.on_event(kind, now);
        if (action == SchedulerAction::CancelInFlight) cancel_active();
        if (action == SchedulerAction::FireRequest) start_cycle(now);
    }

    // --- dispatch -------------------------------------------------------

    json config_json() const {
        const auto& c = session_.config();
        return {{"task", c.task.text()},
                {"taskSource", to_string(c.task.source())},
                {"enabledTypes", to_json(c.enabled)},
                {"model", c.model}};
    }

    void dispatch_one(Out& out, const json& msg, TimeMs now) {
        if (!msg.is_object() || msg.value("jsonrpc", std::string{}) != "2.0" || !msg.contains("method") ||
            !msg["method"].is_string()) {
            ++stats_.rpc_errors;
            json id = msg.is_object() && msg.contains("id") && rpc::is_valid_id(msg["id"]) ? msg["id"] : json(nullptr);
            out.push_back(rpc::make_error(id, rpc::kInvalidRequest, "Invalid Request"));
            return;
        }
        const bool has_id = msg.contains("id");
        if (has_id && !rpc::is_valid_id(msg["id"])) {
            ++stats_.rpc_errors;
            out.push_back(rpc::make_error(nullptr, rpc::kInvalidRequest, "id must be an integer or string"));
            return;
        }
        const json id = has_id ? msg["id"] : json(nullptr);
        const std::string method = msg["method"].get<std::string>();
        const json params = msg.contains("params") ? msg["params"] : json::object();

        auto reply_error = [&](int code, std::string message, json data = nullptr) {
            ++stats_.rpc_errors;
            if (has_id) out.push_back(rpc::make_error(id, code, std::move(message), std::move(data)));
        };

        if (!params.is_object()) {
            reply_error(rpc::kInvalidParams, "params must be an object");
            return;
        }
        if (!initialized_ && method != "initialize" && method != "shutdown") {
            reply_error(rpc::kServerNotInitialized, "initialize first");
            return;
        }

        try {
            std::optional<json> result = call_method(out, method, params, now);
            if (!result) {
                reply_error(rpc::kMethodNotFound, "Method not found: " + method);
                return;
            }
            if (has_id) out.push_back(rpc::make_result(id, std::move(*result)));
        } catch (const Error& e) {
            ++stats_.rpc_errors;
            if (has_id) out.push_back(rpc::make_error(id, e.info()));
        } catch (const InvalidParams& e) {
            reply_error(rpc::kInvalidParams, e.what());
        } catch (const json::exception& e) {
            reply_error(rpc::kInvalidParams, e.what());
        }
    }

    /// nullopt means unknown method.
    std::optional<json> call_method(Out& out, const std::string& method, const json& params, TimeMs now) {
        if (method == "initialize") {
            const int version = params.value("protocolVersion", rpc::kProtocolVersion);
            if (version != rpc::kProtocolVersion) {
                throw InvalidParams("unsupported protocolVersion " + std::to_string(version));
            }
            initialized_ = true;
            auto models = json::array();
            for (const auto& [m, _] : ledger_.pricing().entries()) models.push_back(m);
            auto types = json::array();
            for (auto t : kAllSuggestionTypes)
                types.push_back({{"id", canonical_id(t)}, {"label", display_label(t)}});
            return json{{"protocolVersion", rpc::kProtocolVersion},
                        {"sessionId", session_id_},
                        {"capabilities",
                         {{"contextWindow", cfg_.context_window},
                          {"suggestionTypes", types},
                          {"models", models},
                          {"manualTrigger", true},
                          {"replayInject", cfg_.enable_replay_inject},
                          {"schedulerMs",
                           {{"codeQuiet", cfg_.scheduler.t_code_quiet}, {"chatQuiet", cfg_.scheduler.t_chat_quiet}}}}},
                        {"config", config_json()}};
        }
        if (method == "shutdown") {
            shutdown_ = true;
            cancel_active();
            return json(nullptr);
        }
        if (method == "document/didOpen") {
            workspace_.open(params.at("uri").get<std::string>(), params.at("text").get<std::string>(),
                            params.value("version", std::int64_t{1}));
            return json(nullptr);
        }
        if (method == "document/didChange") {
            const auto uri = params.at("uri").get<std::string>();
            if (params.contains("changes")) {
                for (const auto& ch : params.at("changes")) {
                    if (ch.contains("range")) {
                        const auto& r = ch.at("range");
                        workspace_.change(uri, TextRange{r.at("start").get<std::size_t>(), r.at("end").get<std::size_t>()},
                                          ch.at("text").get<std::string>());
                    } else {
                        workspace_.replace_all(uri, ch.at("text").get<std::string>());
                    }
                }
            } else {
                workspace_.replace_all(uri, params.at("text").get<std::string>());
            }
            ++stats_.code_changes;
            scheduler_event(out, EventKind::CodeChange, now);
            return json{{"version", workspace_.document(uri).version}};
        }
        if (method == "cursor/didMove") {
            workspace_.move_cursor(params.at("uri").get<std::string>(), params.at("offset").get<std::size_t>());
            return json(nullptr);
        }
        if (method == "chat/typing") {
            scheduler_event(out, EventKind::ChatTyping, now);
            return json(nullptr);
        }
        if (method == "chat/sendMessage") {
            append_message(out, Role::User, params.at("text").get<std::string>(), now);
            const auto index = session_.messages().size() - 1;
            scheduler_event(out, EventKind::ChatMessageSent, now);
            start_chat(now);
            return json{{"index", index}};
        }
        if (method == "suggestions/accept") {
            const auto sid = params.at("suggestionId").get<std::string>();
            const auto& m = session_.accept_suggestion(sid, now);
            journal_.accept(sid, now);
            out.push_back(rpc::make_notification(
                "chat/messageAppended", {{"message", to_json(m)}, {"index", session_.messages().size() - 1}}));
            auto message = to_json(m);
            scheduler_event(out, EventKind::SuggestionAccepted, now);
            return json{{"message", message}};
        }
        if (method == "suggestions/interact") {
            scheduler_event(out, EventKind::SuggestionInteraction, now);
            return json(nullptr);
        }
        if (method == "suggestions/dismiss") {
            const auto gid = session_.dismiss_group();
            journal_.dismiss();
            out.push_back(rpc::make_notification("suggestions/cleared", {{"groupId", gid}}));
            scheduler_event(out, EventKind::SuggestionInteraction, now);
            return json{{"groupId", gid}};
        }
        if (method == "suggestions/trigger") {
            const auto action = scheduler_.on_event(EventKind::ManualTrigger, now);
            if (action == SchedulerAction::FireRequest) {
                ++stats_.manual_fires;
                start_cycle(now);
            }
            return json{{"fired", action == SchedulerAction::FireRequest}};
        }
        if (method == "config/update") {
            std::optional<TaskDescription> task;
            std::optional<TypeSet> enabled;
            std::optional<std::string> model;
            if (params.contains("task")) {
                task = TaskDescription(params.at("task").get<std::string>(),
                                       parse_task_source(params.value("taskSource", std::string("user"))));
            }
            if (params.contains("enabledTypes")) {
                TypeSet set;
                for (const auto& label : params.at("enabledTypes")) set.insert(cfg_.aliases.resolve(label.get<std::string>()));
                enabled = std::move(set);
            }
            if (params.contains("model")) model = params.at("model").get<std::string>();
            session_.update_config(std::move(task), std::move(enabled), std::move(model));
            journal_.config(session_.config());
            return json{{"config", config_json()}};
        }
        if (method == "session/getState") {
            return session_state_json();
        }
        if (method == "replay/injectEvent") {
            if (!cfg_.enable_replay_inject) return std::nullopt;
            const TimeMs t = params.at("t_ms").get<TimeMs>();
            if (t < last_time_) {
                throw Error(ErrorCode::StaleEvent, "injected time " + std::to_string(t) + " precedes " +
                                                       std::to_string(last_time_));
            }
            json inner = rpc::make_notification(params.at("method").get<std::string>(),
                                                params.value("params", json::object()));
            advance_into(out, t);
            dispatch_one(out, inner, t);
            return json{{"t_ms", t}};
        }
        return std::nullopt;
    }

    void start_chat(TimeMs now) {
        ++stats_.chat_requests;
        PromptBundle bundle;
        bundle.model = session_.config().model;
        std::string history;
        for (const auto& m : session_.messages()) {
            if (!history.empty()) history += "\n";
            history += std::string(to_string(m.role)) + ": " + m.body;
        }
        bundle.sections.push_back(PromptSection{std::string(section::kChatHistory), std::move(history)});
        dispatch_call(Call{CallKind::Chat, 0, 1, std::move(bundle), CancellationToken{}}, now);
    }

    DaemonConfig cfg_;
    std::shared_ptr<Provider> provider_;
    AsyncDispatch async_;
    std::string session_id_;

    Workspace workspace_;
    Scheduler scheduler_;
    Session session_;
    SessionJournal journal_;
    PromptAssets assets_;
    CostLedger ledger_;
    EngineStats stats_;

    std::map<CallId, Call> calls_;
    std::vector<Pending> pending_;
    std::optional<Active> active_;
    CallId next_call_ = 1;
    std::uint64_t cycle_counter_ = 0;
    TimeMs last_time_ = 0;
    bool initialized_ = false;
    bool shutdown_ = false;
};

} // namespace genie
