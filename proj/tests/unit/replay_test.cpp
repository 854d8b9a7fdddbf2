#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "genie/replay.hpp"

using namespace genie;

namespace {

std::string trace_path(const std::string& name) { return std::string(GENIE_TRACE_DIR) + "/" + name; }

std::vector<TraceEvent> parse(const std::string& text) {
    std::istringstream in(text);
    return parse_trace(in);
}

} // namespace

TEST(Replay, EmptyTrace) {
    auto r = replay_file(trace_path("empty.jsonl"), {});
    EXPECT_EQ(r.proactive_requests, 0u);
    EXPECT_TRUE(r.fire_times.empty());
    EXPECT_EQ(r.ledger_total.count(), 0);
}

TEST(Replay, SingleChange) {
    auto r = replay_file(trace_path("single_change.jsonl"), {});
    EXPECT_EQ(r.proactive_requests, 1u);
    EXPECT_EQ(r.fire_times, (std::vector<TimeMs>{5000}));
    EXPECT_EQ(r.groups_published, 1u);
}

TEST(Replay, TypingBurst) {
    auto r = replay_file(trace_path("typing_burst.jsonl"), {});
    EXPECT_EQ(r.code_changes, 61u);
    EXPECT_EQ(r.proactive_requests, 1u);
    EXPECT_EQ(r.fire_times, (std::vector<TimeMs>{65000}));
}

TEST(Replay, ReportsAreByteIdentical) {
    for (const char* name : {"empty.jsonl", "single_change.jsonl", "typing_burst.jsonl"}) {
        DaemonConfig cfg;
        cfg.mock_seed = 1234;
        const auto a = replay_file(trace_path(name), cfg);
        const auto b = replay_file(trace_path(name), cfg);
        EXPECT_EQ(a.to_json().dump(2), b.to_json().dump(2)) << name;
        EXPECT_EQ(a.to_text(), b.to_text()) << name;
    }
}

TEST(Replay, ReportCostsAreConsistent) {
    auto r = replay_file(trace_path("single_change.jsonl"), {});
    const auto table = PricingTable::defaults();
    EXPECT_EQ(r.ledger_total, table.request_cost("gpt-4o", r.input_tokens, r.output_tokens));
    EXPECT_EQ(r.cost_per_model.at("codestral"), table.request_cost("codestral", r.input_tokens, r.output_tokens));
    ASSERT_TRUE(r.price_ratio_input_limit);
    EXPECT_EQ(*r.price_ratio_input_limit, 12.5);
    const auto j = r.to_json();
    EXPECT_EQ(j["scenarios"]["rows"][0]["multiplier"], 11.0);
    EXPECT_EQ(j["scenarios"]["rows"][1]["multiplier"], 2.0);
}

TEST(Replay, RpcMethodEventsAndChat) {
    auto trace = parse(
        R"({"t_ms": 0, "event": "document/didOpen", "payload": {"uri": "file:///m.py", "text": "def f():\n    pass\n"}}
{"t_ms": 100, "event": "document/didChange", "payload": {"uri": "file:///m.py", "text": "def f():\n    return 1\n"}}
{"t_ms": 2000, "event": "ChatMessageSent", "payload": {"text": "hi"}}
{"t_ms": 40000, "event": "CodeChange", "payload": {"uri": "file:///m.py"}}
{"t_ms": 50000, "event": "end"}
)");
    auto r = replay(trace, {});
    EXPECT_EQ(r.chat_requests, 1u);
    EXPECT_EQ(r.fire_times, (std::vector<TimeMs>{45000}));
    EXPECT_EQ(r.rpc_errors, 0u);
}

TEST(Replay, AcceptInTrace) {
    auto trace = parse(R"({"t_ms": 0, "event": "CodeChange"}
{"t_ms": 6000, "event": "SuggestionAccepted"}
{"t_ms": 7000, "event": "CodeChange"}
{"t_ms": 40000, "event": "tick"}
)");
    auto r = replay(trace, {});
    EXPECT_EQ(r.fire_times, (std::vector<TimeMs>{5000, 36000}));
    EXPECT_EQ(r.rpc_errors, 0u);
}

TEST(Replay, MalformedLinesAreReported) {
    try {
        parse("{\"t_ms\": 0, \"event\": \"tick\"}\nnot json\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MalformedTrace);
        EXPECT_EQ(e.detail(), 2);
    }
    EXPECT_THROW(parse("{\"event\": \"tick\"}\n"), Error);
    EXPECT_THROW(parse("{\"t_ms\": 0, \"event\": \"tick\", \"payload\": 3}\n"), Error);
    try {
        replay(parse("{\"t_ms\": 0, \"event\": \"RequestCompleted\"}\n"), {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MalformedTrace);
    }
}

TEST(Replay, NonMonotonicTime) {
    try {
        parse("{\"t_ms\": 10, \"event\": \"tick\"}\n{\"t_ms\": 20, \"event\": \"tick\"}\n{\"t_ms\": 5, \"event\": \"tick\"}\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonMonotonicTime);
        EXPECT_EQ(e.detail(), 3);
    }
}

TEST(Replay, SeedChangesOutputNotSchedule) {
    DaemonConfig a;
    a.mock_seed = 1;
    DaemonConfig b;
    b.mock_seed = 2;
    auto ra = replay_file(trace_path("typing_burst.jsonl"), a);
    auto rb = replay_file(trace_path("typing_burst.jsonl"), b);
    EXPECT_EQ(ra.fire_times, rb.fire_times);
}

TEST(Replay, TraceLineRoundTrip) {
    auto events = parse("{\"t_ms\": 3, \"event\": \"chat/typing\", \"payload\": {}}\n");
    ASSERT_EQ(events.size(), 1u);
    EXPECT_EQ(trace_line(events[0]).dump(), R"({"event":"chat/typing","payload":{},"t_ms":3})");
}
