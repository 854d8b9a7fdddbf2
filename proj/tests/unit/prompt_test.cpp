#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "genie/prompt.hpp"
#include "genie/suggestion_type.hpp"

using namespace genie;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> ids(const PromptBundle& b) {
    std::vector<std::string> out;
    for (const auto& s : b.sections) out.push_back(s.id);
    return out;
}

CodeContext sample_context() {
    Document d{"file:///avg.py", "def average(xs):\n    return sum(xs) / len(xs)\n", 1};
    return extract_context(d, {d.uri, 18});
}

} // namespace

TEST(Prompt, SectionOrderWithEverything) {
    std::vector<ChatMessage> history{{Role::User, "hi", MessageOrigin::Typed, 0}};
    auto b = build_prompt(sample_context(), history, TaskDescription("compute averages"), all_types());
    EXPECT_EQ(ids(b), (std::vector<std::string>{"system-preamble", "format-instructions", "one-shot-example",
                                                "enabled-types", "task-description", "chat-history",
                                                "code-context"}));
    EXPECT_EQ(b.model, "gpt-4o");
}

TEST(Prompt, OptionalSectionsOmittedWhenEmpty) {
    auto b = build_prompt(sample_context(), {}, TaskDescription(), all_types());
    EXPECT_EQ(ids(b), (std::vector<std::string>{"system-preamble", "format-instructions", "one-shot-example",
                                                "enabled-types", "code-context"}));
    PromptConfig no_history;
    no_history.history_messages = 0;
    std::vector<ChatMessage> history{{Role::User, "hi", MessageOrigin::Typed, 0}};
    EXPECT_FALSE(build_prompt(sample_context(), history, TaskDescription(), all_types(), no_history)
                     .find(section::kChatHistory));
}

TEST(Prompt, EnabledTypesGolden) {
    auto b = build_prompt(sample_context(), {}, TaskDescription(), {SuggestionType::BugFix, SuggestionType::Test});
    EXPECT_EQ(b.find(section::kEnabledTypes)->text,
              "Only offer suggestions of these types:\n"
              "- additional testing (tag: \"test\")\n"
              "- bug fixes (tag: \"bug-fix\")\n");
}

TEST(Prompt, AssetsMatchFilesByteForByte) {
    auto b = build_prompt(sample_context(), {}, TaskDescription(), all_types());
    const std::string dir = GENIE_ASSET_DIR;
    EXPECT_EQ(b.find(section::kOneShotExample)->text, read_file(dir + "/one_shot_example.txt"));
    EXPECT_EQ(b.find(section::kFormatInstructions)->text, read_file(dir + "/format_instructions.txt"));
    EXPECT_EQ(b.find(section::kSystemPreamble)->text, read_file(dir + "/system_preamble.txt"));
    EXPECT_EQ(PromptAssets::load(dir).one_shot_example, PromptAssets::packaged().one_shot_example);
}

TEST(Prompt, AssetOverrideFallsBackPerFile) {
    auto assets = PromptAssets::load("/nonexistent/dir");
    EXPECT_EQ(assets.system_preamble, PromptAssets::packaged().system_preamble);
}

TEST(Prompt, CursorSentinelAtLengthOfBefore) {
    auto ctx = sample_context();
    auto b = build_prompt(ctx, {}, TaskDescription(), all_types());
    const auto& text = b.find(section::kCodeContext)->text;
    EXPECT_EQ(text.find(kCursorSentinel), ctx.before.size());
    EXPECT_EQ(text, ctx.before + "<|cursor|>" + ctx.after);
}

TEST(Prompt, HistoryKeepsLastMessages) {
    std::vector<ChatMessage> history;
    for (int i = 0; i < 15; ++i)
        history.push_back({i % 2 ? Role::Assistant : Role::User, "m" + std::to_string(i), MessageOrigin::Typed, i});
    auto b = build_prompt(sample_context(), history, TaskDescription(), all_types());
    const auto& text = b.find(section::kChatHistory)->text;
    EXPECT_EQ(text.rfind("user: m5", 0), std::string::npos);
    EXPECT_EQ(text.rfind("assistant: m5", 0), 0u);
    EXPECT_NE(text.find("user: m14"), std::string::npos);
    EXPECT_EQ(text.find("m4\n"), std::string::npos);
}

TEST(Prompt, PureFunctionOfInputs) {
    std::vector<ChatMessage> history{{Role::User, "hi", MessageOrigin::Typed, 0}};
    auto a = build_prompt(sample_context(), history, TaskDescription("t"), all_types());
    auto b = build_prompt(sample_context(), history, TaskDescription("t"), all_types());
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.render(), b.render());
}

TEST(Prompt, EmptyTypeSetRejected) {
    try {
        build_prompt(sample_context(), {}, TaskDescription(), {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyTypeSet);
    }
}

TEST(Prompt, TaskLengthCap) {
    EXPECT_NO_THROW(TaskDescription(std::string(8000, 'a')));
    try {
        TaskDescription(std::string(8001, 'a'));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::TaskTooLong);
    }
    TaskDescription imported("ticket body", TaskSource::ImportedTicket);
    EXPECT_EQ(to_string(imported.source()), "imported-ticket");
    EXPECT_EQ(parse_task_source("user"), TaskSource::User);
}

TEST(Prompt, RenderBodyUsesSectionHeadings) {
    auto b = build_prompt(sample_context(), {}, TaskDescription("goal"), {SuggestionType::Test});
    const auto body = b.render_body();
    EXPECT_EQ(body.rfind("## format-instructions\n", 0), 0u);
    EXPECT_NE(body.find("\n\n## task-description\ngoal\n\n## code-context\n"), std::string::npos);
    EXPECT_EQ(body.find("## system-preamble"), std::string::npos);
}

TEST(SuggestionTypes, CanonicalIdsAndLabels) {
    EXPECT_EQ(canonical_id(SuggestionType::BugFix), "bug-fix");
    EXPECT_EQ(canonical_id(SuggestionType::SyntaxHint), "syntax-hint");
    EXPECT_EQ(display_label(SuggestionType::Brainstorm), "brainstorming ideas");
    for (auto t : kAllSuggestionTypes) {
        EXPECT_EQ(resolve_type(canonical_id(t)), t);
        EXPECT_EQ(resolve_type(display_label(t)), t);
    }
}

TEST(SuggestionTypes, AliasesResolveCaseInsensitively) {
    EXPECT_EQ(resolve_type("Debugging"), SuggestionType::BugFix);
    EXPECT_EQ(resolve_type("EFFICIENCY"), SuggestionType::Improvement);
    EXPECT_EQ(resolve_type("Improvements"), SuggestionType::Improvement);
    EXPECT_EQ(resolve_type("testing"), SuggestionType::Test);
    EXPECT_EQ(resolve_type("  ideas "), SuggestionType::Brainstorm);
    try {
        resolve_type("refactoring");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownType);
    }
    AliasTable custom;
    custom.add("perf", SuggestionType::Improvement);
    EXPECT_EQ(resolve_type("Perf", custom), SuggestionType::Improvement);
}
