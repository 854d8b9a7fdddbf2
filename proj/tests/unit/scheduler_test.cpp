#include <gtest/gtest.h>

#include "genie/scheduler.hpp"
#include "scheduler_props.hpp"

using namespace genie;

namespace {

// Ticks every millisecond from `from` to `to` and returns the fire times.
std::vector<TimeMs> sweep(Scheduler& s, TimeMs from, TimeMs to) {
    std::vector<TimeMs> fires;
    for (TimeMs t = from; t <= to; ++t) {
        if (s.tick(t) == SchedulerAction::FireRequest) fires.push_back(t);
    }
    return fires;
}

} // namespace

TEST(Scheduler, DefaultsAndValidation) {
    SchedulerConfig cfg;
    EXPECT_EQ(cfg.t_code_quiet, 5000);
    EXPECT_EQ(cfg.t_chat_quiet, 30000);
    EXPECT_THROW((Scheduler(SchedulerConfig{0, 100})), Error);
    EXPECT_THROW((Scheduler(SchedulerConfig{100, 100})), Error);
    EXPECT_NO_THROW((Scheduler(SchedulerConfig{100, 101})));
}

TEST(Scheduler, SingleChangeFiresAfterCodeQuiet) {
    Scheduler s;
    EXPECT_EQ(s.on_event(EventKind::CodeChange, 0), SchedulerAction::None);
    EXPECT_EQ(s.next_fire_time(), 5000);
    EXPECT_EQ(s.tick(4999), SchedulerAction::None);
    EXPECT_EQ(s.tick(5000), SchedulerAction::FireRequest);
    EXPECT_TRUE(s.state().in_flight);
    EXPECT_EQ(s.tick(6000), SchedulerAction::None);
}

TEST(Scheduler, TypingBurstFiresOnceAfterLastChange) {
    Scheduler s;
    std::vector<TimeMs> fires;
    for (TimeMs t = 0; t <= 60000; t += 1000) {
        auto more = sweep(s, t == 0 ? 0 : t - 999, t - 1);
        fires.insert(fires.end(), more.begin(), more.end());
        s.on_event(EventKind::CodeChange, t);
    }
    auto rest = sweep(s, 60000, 70000);
    fires.insert(fires.end(), rest.begin(), rest.end());
    ASSERT_EQ(fires.size(), 1u);
    EXPECT_EQ(fires[0], 65000);
}

TEST(Scheduler, ChatSuppressesUntilChatQuietAndNextChange) {
    Scheduler s;
    s.on_event(EventKind::CodeChange, 0);
    s.on_event(EventKind::ChatTyping, 1000);
    EXPECT_FALSE(s.next_fire_time());
    EXPECT_TRUE(sweep(s, 1000, 40000).empty());
    // A code change inside the chat window re-arms but waits for the window.
    s.on_event(EventKind::CodeChange, 40001);
    EXPECT_EQ(s.next_fire_time(), 45001);
    Scheduler t;
    t.on_event(EventKind::ChatMessageSent, 0);
    t.on_event(EventKind::CodeChange, 1000);
    EXPECT_EQ(t.next_fire_time(), 30000);
    EXPECT_EQ(t.tick(29999), SchedulerAction::None);
    EXPECT_EQ(t.tick(30000), SchedulerAction::FireRequest);
}

TEST(Scheduler, CodeChangeCancelsInFlight) {
    Scheduler s;
    s.on_event(EventKind::CodeChange, 0);
    ASSERT_EQ(s.tick(5000), SchedulerAction::FireRequest);
    EXPECT_EQ(s.on_event(EventKind::CodeChange, 5200), SchedulerAction::CancelInFlight);
    EXPECT_FALSE(s.state().in_flight);
    EXPECT_EQ(s.tick(10200), SchedulerAction::FireRequest);
}

TEST(Scheduler, SingleInFlight) {
    Scheduler s;
    s.on_event(EventKind::ManualTrigger, 0);
    EXPECT_TRUE(s.state().in_flight);
    EXPECT_EQ(s.on_event(EventKind::ManualTrigger, 10), SchedulerAction::None);
    s.on_event(EventKind::RequestCompleted, 20);
    EXPECT_EQ(s.on_event(EventKind::ManualTrigger, 30), SchedulerAction::FireRequest);
    s.on_event(EventKind::RequestFailed, 40);
    EXPECT_FALSE(s.state().in_flight);
}

TEST(Scheduler, ManualTriggerIgnoresQuietPeriods) {
    Scheduler s;
    s.on_event(EventKind::ChatTyping, 0);
    s.on_event(EventKind::CodeChange, 100);
    EXPECT_EQ(s.on_event(EventKind::ManualTrigger, 200), SchedulerAction::FireRequest);
    s.on_event(EventKind::RequestCompleted, 300);
    EXPECT_FALSE(s.next_fire_time());
}

TEST(Scheduler, AcceptRetainsUntilNextCompletion) {
    Scheduler s;
    s.on_event(EventKind::SuggestionAccepted, 0);
    EXPECT_TRUE(s.state().retain_current_group);
    EXPECT_EQ(s.state().suppress_until, 30000);
    s.on_event(EventKind::ManualTrigger, 10);
    s.on_event(EventKind::RequestCompleted, 20);
    EXPECT_FALSE(s.state().retain_current_group);
}

TEST(Scheduler, StaleEventThrowsAndStaleTickIsIgnored) {
    Scheduler s;
    s.on_event(EventKind::CodeChange, 1000);
    try {
        s.on_event(EventKind::CodeChange, 999);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::StaleEvent);
    }
    EXPECT_EQ(s.tick(500), SchedulerAction::None);
    EXPECT_EQ(s.tick(6000), SchedulerAction::FireRequest);
}

TEST(Scheduler, PureFunctionsLeaveInputUntouched) {
    SchedulerState st;
    SchedulerConfig cfg;
    auto a = on_event(st, cfg, {EventKind::CodeChange, 0});
    auto b = on_event(st, cfg, {EventKind::CodeChange, 0});
    EXPECT_EQ(a.state, b.state);
    EXPECT_EQ(st, SchedulerState{});
}

TEST(SchedulerProperty, RandomStreamsSafeAndLive) {
    std::size_t fires = 0;
    for (std::uint64_t seed = 1; seed <= 2000; ++seed) {
        auto rep = props::check_scheduler_stream(seed);
        ASSERT_EQ(rep.violations, 0u) << rep.first_violation;
        fires += rep.fires;
    }
    EXPECT_GT(fires, 0u);
}

TEST(SchedulerProperty, ShortQuietPeriods) {
    for (std::uint64_t seed = 1; seed <= 500; ++seed) {
        auto rep = props::check_scheduler_stream(seed, SchedulerConfig{150, 600});
        ASSERT_EQ(rep.violations, 0u) << rep.first_violation;
    }
}
