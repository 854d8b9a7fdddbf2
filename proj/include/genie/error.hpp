#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace genie {

enum class ErrorCode {
    OutOfRange,
    StaleEvent,
    UnknownType,
    EmptyTypeSet,
    TaskTooLong,
    Timeout,
    HttpError,
    Cancelled,
    RateLimited,
    ParseFailure,
    EmptyGroup,
    SchemaViolation,
    UnknownSuggestion,
    AlreadyResolved,
    NoCurrentGroup,
    UnknownModel,
    UnknownDocument,
    MalformedTrace,
    NonMonotonicTime,
    InvalidConfig,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::StaleEvent: return "StaleEvent";
    case ErrorCode::UnknownType: return "UnknownType";
    case ErrorCode::EmptyTypeSet: return "EmptyTypeSet";
    case ErrorCode::TaskTooLong: return "TaskTooLong";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::HttpError: return "HttpError";
    case ErrorCode::Cancelled: return "Cancelled";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::ParseFailure: return "ParseFailure";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::UnknownSuggestion: return "UnknownSuggestion";
    case ErrorCode::AlreadyResolved: return "AlreadyResolved";
    case ErrorCode::NoCurrentGroup: return "NoCurrentGroup";
    case ErrorCode::UnknownModel: return "UnknownModel";
    case ErrorCode::UnknownDocument: return "UnknownDocument";
    case ErrorCode::MalformedTrace: return "MalformedTrace";
    case ErrorCode::NonMonotonicTime: return "NonMonotonicTime";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

/// Value carried by every failure in the engine: a code plus a human message.
/// `detail` holds an auxiliary integer (HTTP status, trace line number).
struct ErrorInfo {
    ErrorCode code;
    std::string message;
    long detail = 0;
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, long detail = 0)
        : std::runtime_error(std::string(to_string(code)) + ": " + message)
        , info_{code, message, detail} {}

    explicit Error(ErrorInfo info)
        : Error(info.code, info.message, info.detail) {}

    ErrorCode code() const noexcept { return info_.code; }
    long detail() const noexcept { return info_.detail; }
    const ErrorInfo& info() const noexcept { return info_; }

private:
    ErrorInfo info_;
};

/// Either a value or an ErrorInfo. Used on paths where failure is an ordinary
/// runtime outcome (model output, transport) rather than a broken contract.
template <class T>
class Result {
public:
    Result(T value) : data_(std::move(value)) {}
    Result(ErrorInfo error) : data_(std::move(error)) {}

    bool ok() const noexcept { return data_.index() == 0; }
    explicit operator bool() const noexcept { return ok(); }

    T& value() & {
        if (!ok()) throw Error(error());
        return std::get<0>(data_);
    }
    const T& value() const& {
        if (!ok()) throw Error(error());
        return std::get<0>(data_);
    }
    T&& value() && {
        if (!ok()) throw Error(error());
        return std::get<0>(std::move(data_));
    }

    const ErrorInfo& error() const { return std::get<1>(data_); }

    T* operator->() { return &value(); }
    const T* operator->() const { return &value(); }
    T& operator*() & { return value(); }
    const T& operator*() const& { return value(); }

private:
    std::variant<T, ErrorInfo> data_;
};

inline ErrorInfo make_error(ErrorCode code, std::string message, long detail = 0) {
    return ErrorInfo{code, std::move(message), detail};
}

} // namespace genie
