#pragma once

#include <cctype>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "genie/error.hpp"

// JSON-RPC 2.0 envelopes and LSP-style Content-Length framing.

namespace genie::rpc {

using nlohmann::json;

inline constexpr int kParseError = -32700;
inline constexpr int kInvalidRequest = -32600;
inline constexpr int kMethodNotFound = -32601;
inline constexpr int kInvalidParams = -32602;
inline constexpr int kInternalError = -32603;
inline constexpr int kServerNotInitialized = -32002;
/// Engine-level failures; `error.data.kind` names the ErrorCode.
inline constexpr int kApplicationError = -32000;

inline constexpr int kProtocolVersion = 1;

inline json make_request(json id, std::string method, json params = json::object()) {
    return {{"jsonrpc", "2.0"}, {"id", std::move(id)}, {"method", std::move(method)}, {"params", std::move(params)}};
}

inline json make_notification(std::string method, json params = json::object()) {
    return {{"jsonrpc", "2.0"}, {"method", std::move(method)}, {"params", std::move(params)}};
}

inline json make_result(json id, json result) {
    return {{"jsonrpc", "2.0"}, {"id", std::move(id)}, {"result", std::move(result)}};
}

inline json make_error(json id, int code, std::string message, json data = nullptr) {
    json err = {{"code", code}, {"message", std::move(message)}};
    if (!data.is_null()) err["data"] = std::move(data);
    return {{"jsonrpc", "2.0"}, {"id", std::move(id)}, {"error", std::move(err)}};
}

inline json make_error(json id, const ErrorInfo& info) {
    return make_error(std::move(id), kApplicationError, info.message,
                      json{{"kind", to_string(info.code)}, {"detail", info.detail}});
}

inline bool is_valid_id(const json& id) { return id.is_number_integer() || id.is_string(); }

inline std::string encode(const json& message) {
    return message.dump(-1, ' ', false, json::error_handler_t::replace);
}

/// Writes one framed message and flushes.
inline void write_body(std::ostream& out, std::string_view body) {
    out << "Content-Length: " << body.size() << "\r\n\r\n" << body;
    out.flush();
}

inline void write_frame(std::ostream& out, const json& message) { write_body(out, encode(message)); }

enum class FrameStatus { Ok, Eof, BadHeader };

struct Frame {
    FrameStatus status = FrameStatus::Eof;
    std::string body;
};

/// Reads one framed message. Header names are case-insensitive; headers other
/// than Content-Length are ignored.
inline Frame read_frame(std::istream& in) {
    std::optional<std::size_t> length;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            if (!length) return {FrameStatus::BadHeader, {}};
            std::string body(*length, '\0');
            in.read(body.data(), static_cast<std::streamsize>(*length));
            if (static_cast<std::size_t>(in.gcount()) != *length) return {FrameStatus::Eof, {}};
            return {FrameStatus::Ok, std::move(body)};
        }
        const auto colon = line.find(':');
        if (colon == std::string::npos) return {FrameStatus::BadHeader, {}};
        std::string name = line.substr(0, colon);
        for (auto& ch : name) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        if (name == "content-length") {
            try {
                length = std::stoull(line.substr(colon + 1));
            } catch (const std::exception&) {
                return {FrameStatus::BadHeader, {}};
            }
        }
    }
    return {FrameStatus::Eof, {}};
}

} // namespace genie::rpc
