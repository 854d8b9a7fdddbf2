#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "genie/config.hpp"
#include "genie/cost.hpp"
#include "genie/engine.hpp"
#include "genie/error.hpp"
#include "genie/provider.hpp"
#include "genie/rpc.hpp"

namespace genie {

/// One line of a JSONL trace: {"t_ms": 1000, "event": "document/didChange", "payload": {...}}.
/// `event` is an RPC method, a scheduler event kind (CodeChange, ChatTyping,
/// ...), or "tick" to advance the clock without input.
struct TraceEvent {
    TimeMs t_ms = 0;
    std::string event;
    nlohmann::json payload = nlohmann::json::object();
    std::size_t line = 0;
};

inline std::vector<TraceEvent> parse_trace(std::istream& in) {
    std::vector<TraceEvent> events;
    std::string text;
    std::size_t line_no = 0;
    std::optional<TimeMs> last;
    while (std::getline(in, text)) {
        ++line_no;
        if (trim(text).empty()) continue;
        auto j = nlohmann::json::parse(text, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("t_ms") || !j["t_ms"].is_number_integer() ||
            !j.contains("event") || !j["event"].is_string()) {
            throw Error(ErrorCode::MalformedTrace, "line " + std::to_string(line_no), static_cast<long>(line_no));
        }
        TraceEvent ev;
        ev.t_ms = j["t_ms"].get<TimeMs>();
        ev.event = j["event"].get<std::string>();
        ev.line = line_no;
        if (j.contains("payload")) {
            if (!j["payload"].is_object()) {
                throw Error(ErrorCode::MalformedTrace, "line " + std::to_string(line_no) + ": payload must be an object",
                            static_cast<long>(line_no));
            }
            ev.payload = j["payload"];
        }
        if (ev.t_ms < 0 || (last && ev.t_ms < *last)) {
            throw Error(ErrorCode::NonMonotonicTime, "line " + std::to_string(line_no), static_cast<long>(line_no));
        }
        last = ev.t_ms;
        events.push_back(std::move(ev));
    }
    return events;
}

inline std::vector<TraceEvent> load_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::MalformedTrace, "cannot open " + path.string(), 0);
    return parse_trace(in);
}

inline nlohmann::json trace_line(const TraceEvent& ev) {
    return {{"t_ms", ev.t_ms}, {"event", ev.event}, {"payload", ev.payload}};
}

struct ScenarioRow {
    double cost_ratio;
    double frequency_fraction;
    double multiplier;
};

struct ReplayReport {
    std::size_t proactive_requests = 0;
    std::size_t manual_requests = 0;
    std::size_t cancelled_requests = 0;
    std::size_t failed_requests = 0;
    std::size_t groups_published = 0;
    std::size_t regenerations = 0;
    std::size_t code_changes = 0;
    std::size_t chat_requests = 0;
    std::size_t rpc_errors = 0;
    std::vector<TimeMs> fire_times;
    std::vector<TimeMs> publish_times;
    TimeMs end_time = 0;

    TokenCount input_tokens = 0;  // all provider calls
    TokenCount output_tokens = 0;
    TokenCount proactive_input_tokens = 0;
    TokenCount proactive_output_tokens = 0;
    Micros ledger_total;          // sum of per-request costs, session model
    std::string session_model;
    std::map<std::string, Micros> cost_per_model; // token totals priced per model

    // measured multiplier vs an autocomplete-only baseline
    std::string autocomplete_model;
    std::optional<double> measured_cost_ratio;
    std::optional<double> measured_frequency_fraction;
    std::optional<double> measured_multiplier;

    // reference scenarios
    std::vector<ScenarioRow> scenarios;
    std::optional<double> price_ratio_input_limit;
    Micros subscription_baseline = Micros(10'000'000);

    nlohmann::json to_json() const {
        auto costs = nlohmann::json::object();
        for (const auto& [m, c] : cost_per_model) costs[m] = {{"micros", c.count()}, {"usd", c.display()}};
        auto rows = nlohmann::json::array();
        for (const auto& r : scenarios) {
            rows.push_back({{"r", r.cost_ratio}, {"p", r.frequency_fraction}, {"multiplier", r.multiplier}});
        }
        auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
        return {
            {"requests",
             {{"proactive", proactive_requests},
              {"manual", manual_requests},
              {"cancelled", cancelled_requests},
              {"failed", failed_requests},
              {"published", groups_published},
              {"regenerations", regenerations},
              {"chat", chat_requests}}},
            {"fire_times_ms", fire_times},
            {"publish_times_ms", publish_times},
            {"end_time_ms", end_time},
            {"code_changes", code_changes},
            {"rpc_errors", rpc_errors},
            {"tokens",
             {{"input", input_tokens},
              {"output", output_tokens},
              {"proactive_input", proactive_input_tokens},
              {"proactive_output", proactive_output_tokens}}},
            {"ledger", {{"model", session_model}, {"micros", ledger_total.count()}, {"usd", ledger_total.display()}}},
            {"cost_per_model", costs},
            {"measured",
             {{"autocomplete_model", autocomplete_model},
              {"r", opt(measured_cost_ratio)},
              {"p", opt(measured_frequency_fraction)},
              {"multiplier", opt(measured_multiplier)}}},
            {"scenarios",
             {{"rows", rows},
              {"price_ratio_input_limit", opt(price_ratio_input_limit)},
              {"subscription_baseline_usd_per_month", subscription_baseline.display()},
              {"subscription_upper_bound_usd_per_month",
               total_cost(2, subscription_baseline).display()}}},
        };
    }

    std::string to_text() const {
        std::ostringstream os;
        char buf[160];
        auto num = [&](double v) {
            std::snprintf(buf, sizeof buf, "%.4f", v);
            return std::string(buf);
        };
        os << "proactive requests : " << proactive_requests << " (manual " << manual_requests << ")\n";
        os << "  published        : " << groups_published << "\n";
        os << "  cancelled        : " << cancelled_requests << "\n";
        os << "  failed           : " << failed_requests << "\n";
        os << "  regenerations    : " << regenerations << "\n";
        os << "fire times (ms)    :";
        if (fire_times.empty()) os << " -";
        for (auto t : fire_times) os << ' ' << t;
        os << "\ncode changes       : " << code_changes << "\n";
        os << "chat requests      : " << chat_requests << "\n";
        os << "tokens             : input " << input_tokens << ", output " << output_tokens << "\n";
        os << "ledger (" << session_model << ")" << std::string(session_model.size() < 10 ? 10 - session_model.size() : 0, ' ')
           << ": " << ledger_total.display() << "\n";
        os << "cost by model (token totals):\n";
        for (const auto& [m, c] : cost_per_model) os << "  " << m << ": " << c.display() << "\n";
        os << "measured vs " << autocomplete_model << " autocomplete baseline:\n";
        if (measured_multiplier) {
            os << "  r = " << num(*measured_cost_ratio) << ", p = " << num(*measured_frequency_fraction)
               << ", multiplier = " << num(*measured_multiplier) << "x\n";
        } else {
            os << "  n/a (no proactive or autocomplete requests)\n";
        }
        os << "reference scenarios (1 + p*r):\n";
        for (const auto& r : scenarios) {
            os << "  r = " << num(r.cost_ratio) << ", p = " << num(r.frequency_fraction)
               << " -> " << num(r.multiplier) << "x\n";
        }
        if (price_ratio_input_limit) {
            os << "  input-price ratio (output -> 0): r = " << num(*price_ratio_input_limit)
               << " (commonly rounded to 10)\n";
        }
        os << "subscription: " << subscription_baseline.display() << "/month baseline, upper bound "
           << total_cost(2, subscription_baseline).display() << "/month at 2x\n";
        return os.str();
    }
};

namespace detail {

inline nlohmann::json event_frame(const TraceEvent& ev, std::int64_t id, const Engine& engine, bool& is_tick,
                                  const std::string& default_uri) {
    using nlohmann::json;
    is_tick = false;
    const std::string& e = ev.event;
    json params = ev.payload;
    std::string method = e;
    if (e == "tick" || e == "end") {
        is_tick = true;
        return nullptr;
    } else if (e == "CodeChange") {
        method = "document/didChange";
        if (!params.contains("uri")) params["uri"] = default_uri;
        if (!params.contains("changes") && !params.contains("text")) {
            const auto& uri = params["uri"].get_ref<const std::string&>();
            const auto len = engine.workspace().contains(uri) ? engine.workspace().document(uri).text.size() : 0;
            params["changes"] = json::array({{{"range", {{"start", len}, {"end", len}}}, {"text", "x"}}});
        }
    } else if (e == "ChatTyping") {
        method = "chat/typing";
    } else if (e == "ChatMessageSent") {
        method = "chat/sendMessage";
        if (!params.contains("text")) params["text"] = "(trace message)";
    } else if (e == "SuggestionInteraction") {
        method = "suggestions/interact";
    } else if (e == "SuggestionAccepted") {
        method = "suggestions/accept";
        if (!params.contains("suggestionId")) {
            std::string sid = "none";
            if (const auto* g = engine.session().current_group()) {
                for (const auto& s : g->suggestions) {
                    if (s.state == SuggestionState::Temporary) {
                        sid = s.id;
                        break;
                    }
                }
            }
            params["suggestionId"] = sid;
        }
    } else if (e == "ManualTrigger") {
        method = "suggestions/trigger";
    } else if (e == "RequestCompleted" || e == "RequestFailed") {
        throw Error(ErrorCode::MalformedTrace,
                    "line " + std::to_string(ev.line) + ": " + e + " is produced by the engine, not the trace",
                    static_cast<long>(ev.line));
    }
    return rpc::make_request(id, method, params);
}

} // namespace detail

inline constexpr std::string_view kReplayDocumentUri = "trace://buffer";

/// Drives a fresh engine through the trace on a virtual clock with the mock
/// provider. Nothing here reads the wall clock.
inline ReplayReport replay(const std::vector<TraceEvent>& trace, DaemonConfig cfg) {
    cfg.session_log_path.reset();
    cfg.enable_replay_inject = false;
    auto provider = std::make_shared<MockProvider>(cfg.mock_seed);
    Engine engine(cfg, provider, "replay");

    const std::string default_uri(kReplayDocumentUri);
    const TimeMs start = trace.empty() ? 0 : trace.front().t_ms;
    std::int64_t next_id = 1;
    engine.handle(rpc::make_request(next_id++, "initialize", {{"protocolVersion", rpc::kProtocolVersion}}), start);
    engine.handle(rpc::make_request(next_id++, "document/didOpen", {{"uri", default_uri}, {"text", ""}}), start);

    TimeMs end = start;
    for (const auto& ev : trace) {
        // Bring the engine up to the event time first so synthesized payloads
        // see the state the client would have seen.
        engine.advance(ev.t_ms);
        bool is_tick = false;
        auto frame = detail::event_frame(ev, next_id++, engine, is_tick, default_uri);
        if (is_tick) {
            engine.advance(ev.t_ms);
        } else {
            engine.handle(frame, ev.t_ms);
        }
        end = ev.t_ms;
    }
    engine.advance(end);
    engine.drain();

    const auto& st = engine.stats();
    const auto& ledger = engine.ledger();
    const auto& pricing = ledger.pricing();

    ReplayReport r;
    r.proactive_requests = st.proactive_requests();
    r.manual_requests = st.manual_fires;
    r.cancelled_requests = st.cancelled;
    r.failed_requests = st.failed;
    r.groups_published = st.published;
    r.regenerations = st.regenerations;
    r.code_changes = st.code_changes;
    r.chat_requests = st.chat_requests;
    r.rpc_errors = st.rpc_errors;
    r.fire_times = st.fire_times;
    r.publish_times = st.publish_times;
    r.end_time = end;
    r.input_tokens = ledger.input_tokens();
    r.output_tokens = ledger.output_tokens();
    r.proactive_input_tokens = st.proactive_input_tokens;
    r.proactive_output_tokens = st.proactive_output_tokens;
    r.ledger_total = ledger.total();
    r.session_model = engine.session().config().model;
    for (const auto& [model, entry] : pricing.entries()) {
        r.cost_per_model[model] = request_cost(r.input_tokens, r.output_tokens, entry);
    }

    r.autocomplete_model = cfg.autocomplete_model;
    const bool have_models = pricing.contains(r.session_model) && pricing.contains(cfg.autocomplete_model);
    const auto priced_calls = static_cast<std::int64_t>(st.published + st.regenerations);
    if (have_models && r.code_changes > 0 && priced_calls > 0) {
        // Same context length for both streams; autocomplete output is negligible.
        const TokenCount mean_in = r.proactive_input_tokens / priced_calls;
        const TokenCount mean_out = r.proactive_output_tokens / priced_calls;
        auto scenario = UsageScenario::equal_context(static_cast<std::int64_t>(r.code_changes),
                                                     static_cast<std::int64_t>(r.proactive_requests), mean_in, 0,
                                                     mean_out, pricing.at(cfg.autocomplete_model),
                                                     pricing.at(r.session_model));
        if (scenario.c_auto.count() > 0) {
            r.measured_cost_ratio = scenario.cost_ratio();
            r.measured_frequency_fraction = scenario.frequency_fraction();
            r.measured_multiplier =
                static_cast<double>(scenario.total().count()) / static_cast<double>(scenario.baseline_cost().count());
        }
    }

    r.scenarios.push_back({10.0, 1.0, proactivity_multiplier(10.0, 1.0)});
    r.scenarios.push_back({10.0, 0.1, proactivity_multiplier(10.0, 0.1)});
    if (pricing.contains("gpt-4o") && pricing.contains("codestral")) {
        const double r_price = input_price_ratio(pricing.at("gpt-4o"), pricing.at("codestral"));
        r.price_ratio_input_limit = r_price;
        r.scenarios.push_back({r_price, 1.0, proactivity_multiplier(r_price, 1.0)});
        r.scenarios.push_back({r_price, 0.1, proactivity_multiplier(r_price, 0.1)});
    }
    return r;
}

inline ReplayReport replay_file(const std::filesystem::path& path, DaemonConfig cfg) {
    return replay(load_trace(path), std::move(cfg));
}

} // namespace genie
