#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "genie/error.hpp"

namespace genie {

// Offsets count code units of the stored text in the client's declared
// encoding. Nothing here re-encodes.

struct Document {
    std::string uri;
    std::string text;
    std::int64_t version = 0;
};

struct Cursor {
    std::string uri;
    std::size_t offset = 0;
};

struct TextRange {
    std::size_t start = 0;
    std::size_t end = 0;
};

inline constexpr std::size_t kDefaultContextWindow = 500;

struct CodeContext {
    std::string uri;
    std::string before;
    std::string after;
    std::size_t window = kDefaultContextWindow;
};

/// Returns a copy of `doc` with `range` replaced by `new_text` and the version
/// bumped by one. Throws OutOfRange when the range does not fit the text.
inline Document apply_change(const Document& doc, TextRange range, std::string_view new_text) {
    if (range.start > range.end || range.end > doc.text.size()) {
        throw Error(ErrorCode::OutOfRange,
                    "change [" + std::to_string(range.start) + "," + std::to_string(range.end) +
                        ") outside document of length " + std::to_string(doc.text.size()));
    }
    Document next{doc.uri, {}, doc.version + 1};
    next.text.reserve(doc.text.size() - (range.end - range.start) + new_text.size());
    next.text.append(doc.text, 0, range.start);
    next.text.append(new_text);
    next.text.append(doc.text, range.end, std::string::npos);
    return next;
}

/// Characters around the cursor. The character at the cursor belongs to `after`.
inline CodeContext extract_context(const Document& doc, const Cursor& cursor,
                                   std::size_t window = kDefaultContextWindow) {
    if (cursor.offset > doc.text.size()) {
        throw Error(ErrorCode::OutOfRange,
                    "cursor " + std::to_string(cursor.offset) + " outside document of length " +
                        std::to_string(doc.text.size()));
    }
    if (window == 0) {
        throw Error(ErrorCode::InvalidConfig, "context window must be positive");
    }
    const std::size_t offset = cursor.offset;
    const std::size_t lo = offset > window ? offset - window : 0;
    const std::size_t hi = std::min(doc.text.size(), offset + window);
    return CodeContext{doc.uri, doc.text.substr(lo, offset - lo), doc.text.substr(offset, hi - offset),
                       window};
}

/// Point-in-time copy used for prompt assembly.
struct WorkspaceSnapshot {
    Document document;
    Cursor cursor;
};

/// Mirrored documents plus the single active cursor for one session.
class Workspace {
public:
    void open(std::string uri, std::string text, std::int64_t version = 1) {
        Document doc{uri, std::move(text), version};
        documents_[uri] = std::move(doc);
        cursor_ = Cursor{std::move(uri), 0};
    }

    /// Applies one edit. The cursor is moved to the end of the inserted text
    /// when it is on the edited document.
    const Document& change(const std::string& uri, TextRange range, std::string_view new_text) {
        auto& doc = find(uri);
        doc = apply_change(doc, range, new_text);
        if (cursor_ && cursor_->uri == uri) cursor_->offset = range.start + new_text.size();
        return doc;
    }

    /// Full-text replacement, used when the client sends no range.
    const Document& replace_all(const std::string& uri, std::string_view new_text) {
        auto& doc = find(uri);
        return change(uri, TextRange{0, doc.text.size()}, new_text);
    }

    void move_cursor(const std::string& uri, std::size_t offset) {
        const auto& doc = find(uri);
        if (offset > doc.text.size()) {
            throw Error(ErrorCode::OutOfRange, "cursor " + std::to_string(offset) + " outside " + uri);
        }
        cursor_ = Cursor{uri, offset};
    }

    bool contains(const std::string& uri) const { return documents_.count(uri) != 0; }

    const Document& document(const std::string& uri) const {
        auto it = documents_.find(uri);
        if (it == documents_.end()) throw Error(ErrorCode::UnknownDocument, uri);
        return it->second;
    }

    const std::optional<Cursor>& cursor() const noexcept { return cursor_; }

    std::optional<WorkspaceSnapshot> snapshot() const {
        if (!cursor_) return std::nullopt;
        auto it = documents_.find(cursor_->uri);
        if (it == documents_.end()) return std::nullopt;
        return WorkspaceSnapshot{it->second, *cursor_};
    }

private:
    Document& find(const std::string& uri) {
        auto it = documents_.find(uri);
        if (it == documents_.end()) throw Error(ErrorCode::UnknownDocument, uri);
        return it->second;
    }

    std::map<std::string, Document> documents_;
    std::optional<Cursor> cursor_;
};

} // namespace genie
