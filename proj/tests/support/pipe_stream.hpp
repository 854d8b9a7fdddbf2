#pragma once

// In-process byte pipe with blocking reads, for driving StdioServer from a
// test thread the way a real client would.

#include <chrono>
#include <condition_variable>
#include <deque>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <streambuf>
#include <string>

#include <nlohmann/json.hpp>

#include "genie/rpc.hpp"

namespace genie::props {

class BytePipe {
public:
    void write(const std::string& data) {
        {
            std::lock_guard lock(mutex_);
            bytes_.insert(bytes_.end(), data.begin(), data.end());
        }
        cv_.notify_all();
    }

    void close() {
        {
            std::lock_guard lock(mutex_);
            closed_ = true;
        }
        cv_.notify_all();
    }

    /// Blocks for at least one byte; returns false at end of stream or when
    /// `timeout` passes.
    bool read_some(std::string& out, std::chrono::milliseconds timeout = std::chrono::hours(1)) {
        std::unique_lock lock(mutex_);
        if (!cv_.wait_for(lock, timeout, [&] { return !bytes_.empty() || closed_; })) return false;
        if (bytes_.empty()) return false;
        out.assign(bytes_.begin(), bytes_.end());
        bytes_.clear();
        return true;
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<char> bytes_;
    bool closed_ = false;
};

class PipeInBuf : public std::streambuf {
public:
    explicit PipeInBuf(BytePipe& pipe) : pipe_(pipe) {}

protected:
    int_type underflow() override {
        if (gptr() < egptr()) return traits_type::to_int_type(*gptr());
        if (!pipe_.read_some(chunk_)) return traits_type::eof();
        setg(chunk_.data(), chunk_.data(), chunk_.data() + chunk_.size());
        return traits_type::to_int_type(*gptr());
    }

private:
    BytePipe& pipe_;
    std::string chunk_;
};

class PipeOutBuf : public std::streambuf {
public:
    explicit PipeOutBuf(BytePipe& pipe) : pipe_(pipe) {}

protected:
    int_type overflow(int_type ch) override {
        if (ch != traits_type::eof()) pending_.push_back(static_cast<char>(ch));
        return ch;
    }
    std::streamsize xsputn(const char* s, std::streamsize n) override {
        pending_.append(s, static_cast<std::size_t>(n));
        return n;
    }
    int sync() override {
        pipe_.write(pending_);
        pending_.clear();
        return 0;
    }

private:
    BytePipe& pipe_;
    std::string pending_;
};

/// Reads Content-Length frames from a pipe with a deadline per frame.
class FrameReader {
public:
    explicit FrameReader(BytePipe& pipe) : pipe_(pipe) {}

    std::optional<nlohmann::json> next(std::chrono::milliseconds timeout) {
        const auto deadline = std::chrono::steady_clock::now() + timeout;
        for (;;) {
            if (auto frame = take()) return nlohmann::json::parse(*frame);
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
            if (left.count() <= 0) return std::nullopt;
            std::string chunk;
            if (!pipe_.read_some(chunk, left)) return std::nullopt;
            buffer_ += chunk;
        }
    }

private:
    std::optional<std::string> take() {
        const auto end = buffer_.find("\r\n\r\n");
        if (end == std::string::npos) return std::nullopt;
        const auto colon = buffer_.find(':');
        const auto length = std::stoul(buffer_.substr(colon + 1, end - colon - 1));
        if (buffer_.size() < end + 4 + length) return std::nullopt;
        auto body = buffer_.substr(end + 4, length);
        buffer_.erase(0, end + 4 + length);
        return body;
    }

    BytePipe& pipe_;
    std::string buffer_;
};

inline std::string frame(const nlohmann::json& msg) {
    const auto body = rpc::encode(msg);
    return "Content-Length: " + std::to_string(body.size()) + "\r\n\r\n" + body;
}

} // namespace genie::props
