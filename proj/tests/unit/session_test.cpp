#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "genie/session.hpp"
#include "session_props.hpp"

using namespace genie;

namespace {

SuggestionGroup group(const std::string& id, std::size_t n = 3) {
    SuggestionGroup g;
    g.id = id;
    for (std::size_t i = 0; i < n; ++i) {
        Suggestion s;
        s.id = id + "-" + std::to_string(i + 1);
        s.tag = SuggestionType::Improvement;
        s.description = "d" + std::to_string(i + 1);
        s.code = "x = " + std::to_string(i);
        s.explanation = "e" + std::to_string(i + 1);
        g.suggestions.push_back(s);
    }
    return g;
}

} // namespace

TEST(Session, AcceptAppendsAssistantMessage) {
    Session s;
    s.append_message(Role::User, "hello", 0);
    s.publish_group(group("g1"));
    const auto& m = s.accept_suggestion("g1-2", 10);
    EXPECT_EQ(m.role, Role::Assistant);
    EXPECT_EQ(m.origin, MessageOrigin::AcceptedSuggestion);
    EXPECT_EQ(m.body, "d2\n\n```\nx = 1\n```\n\ne2");
    EXPECT_EQ(m.at, 10);
    EXPECT_EQ(s.messages().size(), 2u);
    EXPECT_TRUE(s.current_group()->retained);
    EXPECT_EQ(s.state().current->anchor, 1u);
}

TEST(Session, RenderAcceptedOmitsEmptyParts) {
    Suggestion s;
    s.description = "only text";
    EXPECT_EQ(render_accepted(s), "only text");
    s.explanation = "why";
    EXPECT_EQ(render_accepted(s), "only text\n\nwhy");
}

TEST(Session, UnretainedGroupReplaced) {
    Session s;
    s.publish_group(group("g1"));
    auto out = s.publish_group(group("g2"));
    EXPECT_EQ(out.discarded_group, "g1");
    EXPECT_FALSE(out.retained_group);
    EXPECT_TRUE(s.state().retained_groups.empty());
    EXPECT_EQ(s.current_group()->id, "g2");
}

TEST(Session, RetainedGroupKeepsAnchor) {
    Session s;
    s.append_message(Role::User, "a", 0);
    s.publish_group(group("g1"));
    s.accept_suggestion("g1-1", 1);
    s.append_message(Role::User, "b", 2);
    auto out = s.publish_group(group("g2"));
    EXPECT_EQ(out.retained_group, "g1");
    ASSERT_EQ(s.state().retained_groups.size(), 1u);
    EXPECT_EQ(s.state().retained_groups[0].anchor, 1u);
    EXPECT_EQ(s.state().current->anchor, 3u);
    // Remaining suggestions of a retained group can still be accepted.
    s.accept_suggestion("g1-3", 3);
    EXPECT_EQ(s.messages().back().body.rfind("d3", 0), 0u);
}

TEST(Session, Errors) {
    Session s;
    EXPECT_THROW(s.dismiss_group(), Error);
    s.publish_group(group("g1"));
    s.accept_suggestion("g1-1", 0);
    try {
        s.accept_suggestion("g1-1", 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::AlreadyResolved);
    }
    try {
        s.accept_suggestion("zzz", 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownSuggestion);
    }
    EXPECT_THROW(s.publish_group(SuggestionGroup{"empty", {}, 0, false}), Error);
    EXPECT_THROW(s.update_config(std::nullopt, TypeSet{}, std::nullopt), Error);
}

TEST(Session, DismissMarksSuggestions) {
    Session s;
    s.publish_group(group("g1"));
    EXPECT_EQ(s.dismiss_group(), "g1");
    EXPECT_FALSE(s.current_group());
    EXPECT_TRUE(s.state().retained_groups.empty());

    s.publish_group(group("g2"));
    s.accept_suggestion("g2-1", 0);
    s.dismiss_group();
    ASSERT_EQ(s.state().retained_groups.size(), 1u);
    const auto& kept = s.state().retained_groups[0].group;
    EXPECT_EQ(kept.suggestions[0].state, SuggestionState::Accepted);
    EXPECT_EQ(kept.suggestions[1].state, SuggestionState::Dismissed);
    EXPECT_THROW(s.accept_suggestion("g2-2", 1), Error);
}

TEST(Session, ConfigUpdate) {
    Session s;
    s.update_config(TaskDescription("goal"), TypeSet{SuggestionType::Test}, std::string("codestral"));
    EXPECT_EQ(s.config().task.text(), "goal");
    EXPECT_EQ(s.config().enabled, TypeSet{SuggestionType::Test});
    EXPECT_EQ(s.config().model, "codestral");
    s.update_config(std::nullopt, std::nullopt, std::nullopt);
    EXPECT_EQ(s.config().model, "codestral");
}

TEST(SessionJournal, RestoreRebuildsState) {
    const auto path = std::filesystem::temp_directory_path() / "genie_journal_test.jsonl";
    std::filesystem::remove(path);
    Session live;
    {
        SessionJournal j(path);
        auto add = [&](Role r, const std::string& body, TimeMs at) { j.message(live.append_message(r, body, at)); };
        add(Role::User, "first", 0);
        live.publish_group(group("g1"));
        j.publish(group("g1"));
        j.message(live.accept_suggestion("g1-2", 5));
        j.accept("g1-2", 5);
        live.update_config(TaskDescription("t"), TypeSet{SuggestionType::BugFix}, std::nullopt);
        j.config(live.config());
        live.publish_group(group("g2"));
        j.publish(group("g2"));
        live.dismiss_group();
        j.dismiss();
        add(Role::Assistant, "reply", 9);
    }
    auto restored = SessionJournal::restore(path);
    EXPECT_EQ(restored.messages(), live.messages());
    EXPECT_EQ(restored.config().enabled, live.config().enabled);
    EXPECT_EQ(restored.config().task.text(), "t");
    ASSERT_EQ(restored.state().retained_groups.size(), 1u);
    EXPECT_EQ(restored.state().retained_groups[0].anchor, 1u);
    EXPECT_FALSE(restored.current_group());

    // A torn final line is ignored.
    { std::ofstream(path, std::ios::app) << "{\"type\":\"mess"; }
    EXPECT_EQ(SessionJournal::restore(path).messages().size(), live.messages().size());
    std::filesystem::remove(path);
}

TEST(SessionProperty, LifecycleInvariants) {
    std::size_t steps = 0;
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
        auto rep = props::check_session_case(seed);
        ASSERT_EQ(rep.violations, 0u) << rep.first_violation;
        steps += rep.steps;
    }
    EXPECT_GT(steps, 1000u);
}
