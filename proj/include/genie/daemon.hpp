#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <variant>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "genie/config.hpp"
#include "genie/engine.hpp"
#include "genie/http_provider.hpp"
#include "genie/provider.hpp"
#include "genie/rpc.hpp"

namespace genie {

inline std::shared_ptr<Provider> make_provider(const DaemonConfig& cfg) {
    if (cfg.use_mock) return std::make_shared<MockProvider>(cfg.mock_seed);
    HttpProviderConfig http;
    http.base_url = cfg.base_url;
    http.api_key = HttpProviderConfig::api_key_from_env();
    http.timeout = std::chrono::milliseconds(cfg.timeout_ms);
    return std::make_shared<HttpProvider>(std::move(http));
}

/// Monotonic milliseconds since construction.
class MonotonicClock {
public:
    TimeMs now() const {
        return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - origin_)
            .count();
    }
    std::chrono::steady_clock::time_point at(TimeMs t) const { return origin_ + std::chrono::milliseconds(t); }

private:
    std::chrono::steady_clock::time_point origin_ = std::chrono::steady_clock::now();
};

namespace detail {

struct FrameItem {
    std::string body;
    bool bad_header = false;
};
struct ClosedItem {};
struct CompletionItem {
    Engine::CallId id;
    Result<ProviderResponse> result;
};
using HostItem = std::variant<FrameItem, ClosedItem, CompletionItem>;

class HostQueue {
public:
    void push(HostItem item) {
        {
            std::lock_guard lock(mutex_);
            items_.push_back(std::move(item));
        }
        cv_.notify_one();
    }

    /// Waits until an item arrives or `deadline` passes.
    std::optional<HostItem> pop(std::optional<std::chrono::steady_clock::time_point> deadline) {
        std::unique_lock lock(mutex_);
        auto ready = [&] { return !items_.empty(); };
        if (deadline) {
            if (!cv_.wait_until(lock, *deadline, ready)) return std::nullopt;
        } else {
            cv_.wait(lock, ready);
        }
        auto item = std::move(items_.front());
        items_.pop_front();
        return item;
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<HostItem> items_;
};

/// Runs provider calls on detached workers and reports back through `post`.
/// Outstanding workers hold their own references, so the host may exit first.
template <class Post>
Engine::AsyncDispatch threaded_dispatch(std::shared_ptr<Provider> provider, Post post) {
    return [provider = std::move(provider), post](Engine::CallId id, ProviderRequest req) {
        std::thread([provider, post, id, req = std::move(req)]() mutable {
            auto result = provider->complete(req);
            post(id, std::move(result));
        }).detach();
    };
}

} // namespace detail

/// JSON-RPC over Content-Length framed byte streams (stdin/stdout).
class StdioServer {
public:
    StdioServer(DaemonConfig cfg, std::shared_ptr<Provider> provider)
        : cfg_(std::move(cfg)), provider_(std::move(provider)) {}

    /// Serves until `shutdown` or end of input. Returns the process exit code.
    int run(std::istream& in, std::ostream& out) {
        // A tied input stream flushes `out` from the reader thread.
        in.tie(nullptr);
        auto queue = std::make_shared<detail::HostQueue>();
        auto reader_done = std::make_shared<std::atomic<bool>>(false);
        std::thread reader([&in, queue, reader_done] {
            for (;;) {
                auto frame = rpc::read_frame(in);
                if (frame.status == rpc::FrameStatus::Eof) break;
                queue->push(detail::FrameItem{std::move(frame.body), frame.status == rpc::FrameStatus::BadHeader});
                if (frame.status == rpc::FrameStatus::BadHeader && !in) break;
            }
            queue->push(detail::ClosedItem{});
            reader_done->store(true);
        });

        MonotonicClock clock;
        Engine engine(cfg_, provider_, "stdio-session",
                      detail::threaded_dispatch(provider_, [queue](Engine::CallId id, Result<ProviderResponse> r) {
                          queue->push(detail::CompletionItem{id, std::move(r)});
                      }));
        auto emit = [&](const std::vector<nlohmann::json>& messages) {
            for (const auto& m : messages) rpc::write_frame(out, m);
        };

        bool running = true;
        while (running) {
            std::optional<std::chrono::steady_clock::time_point> deadline;
            if (auto next = engine.next_deadline()) deadline = clock.at(*next);
            auto item = queue->pop(deadline);
            const TimeMs now = clock.now();
            if (!item) {
                emit(engine.advance(now));
                continue;
            }
            if (auto* frame = std::get_if<detail::FrameItem>(&*item)) {
                if (frame->bad_header) {
                    emit({rpc::make_error(nullptr, rpc::kParseError, "bad frame header")});
                    continue;
                }
                emit(engine.handle_frame(frame->body, now));
                if (engine.shutdown_requested()) running = false;
            } else if (auto* done = std::get_if<detail::CompletionItem>(&*item)) {
                emit(engine.on_provider_result(done->id, std::move(done->result), now));
            } else {
                running = false;
            }
        }
        if (reader_done->load()) {
            reader.join();
        } else {
            reader.detach();
        }
        return 0;
    }

private:
    DaemonConfig cfg_;
    std::shared_ptr<Provider> provider_;
};

namespace detail {

namespace beast = boost::beast;
namespace websocket = boost::beast::websocket;
namespace asio = boost::asio;
using tcp = asio::ip::tcp;

/// One WebSocket client = one engine. Everything runs on the io_context
/// thread; provider workers post their results back onto it.
class WsSession : public std::enable_shared_from_this<WsSession> {
public:
    WsSession(tcp::socket socket, const DaemonConfig& cfg, std::shared_ptr<Provider> provider, std::string id)
        : ws_(std::move(socket)), timer_(ws_.get_executor()), cfg_(cfg), provider_(std::move(provider)),
          id_(std::move(id)) {}

    void start() {
        auto self = shared_from_this();
        std::weak_ptr<WsSession> weak = self;
        auto executor = ws_.get_executor();
        engine_ = std::make_unique<Engine>(
            cfg_, provider_, id_,
            threaded_dispatch(provider_, [weak, executor](Engine::CallId id, Result<ProviderResponse> r) {
                auto shared = std::make_shared<Result<ProviderResponse>>(std::move(r));
                asio::post(executor, [weak, id, shared] {
                    if (auto s = weak.lock()) s->on_completion(id, std::move(*shared));
                });
            }));
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept([self](beast::error_code ec) {
            if (!ec) self->read();
        });
    }

private:
    void read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->closed_ = true;
                self->timer_.cancel();
                return;
            }
            auto body = beast::buffers_to_string(self->buffer_.data());
            self->buffer_.consume(self->buffer_.size());
            self->emit(self->engine_->handle_frame(body, self->clock_.now()));
            if (self->engine_->shutdown_requested()) {
                self->closing_ = true;
                self->flush();
                return;
            }
            self->rearm();
            self->read();
        });
    }

    void on_completion(Engine::CallId id, Result<ProviderResponse> r) {
        if (closed_) return;
        emit(engine_->on_provider_result(id, std::move(r), clock_.now()));
        rearm();
    }

    void rearm() {
        auto next = engine_->next_deadline();
        if (!next) return;
        timer_.expires_at(clock_.at(*next));
        timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
            if (ec || self->closed_) return;
            self->emit(self->engine_->advance(self->clock_.now()));
            self->rearm();
        });
    }

    void emit(const std::vector<nlohmann::json>& messages) {
        for (const auto& m : messages) outbox_.push_back(rpc::encode(m));
        flush();
    }

    void flush() {
        if (writing_ || closed_) return;
        if (outbox_.empty()) {
            if (closing_) {
                closed_ = true;
                ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
            }
            return;
        }
        writing_ = true;
        ws_.text(true);
        ws_.async_write(asio::buffer(outbox_.front()),
                        [self = shared_from_this()](beast::error_code ec, std::size_t) {
                            self->writing_ = false;
                            if (ec) {
                                self->closed_ = true;
                                return;
                            }
                            self->outbox_.pop_front();
                            self->flush();
                        });
    }

    websocket::stream<beast::tcp_stream> ws_;
    asio::steady_timer timer_;
    beast::flat_buffer buffer_;
    std::deque<std::string> outbox_;
    DaemonConfig cfg_;
    std::shared_ptr<Provider> provider_;
    std::string id_;
    MonotonicClock clock_;
    std::unique_ptr<Engine> engine_;
    bool writing_ = false;
    bool closing_ = false;
    bool closed_ = false;
};

} // namespace detail

/// JSON-RPC over WebSocket, one message per text frame, loopback only.
class WsServer {
public:
    WsServer(DaemonConfig cfg, std::shared_ptr<Provider> provider)
        : cfg_(std::move(cfg)), provider_(std::move(provider)),
          acceptor_(io_, detail::tcp::endpoint(boost::asio::ip::make_address("127.0.0.1"), 0)) {}

    /// Binds to `port` (0 picks a free one) and returns the bound port.
    unsigned short bind(unsigned short port) {
        namespace asio = boost::asio;
        acceptor_.close();
        detail::tcp::endpoint ep(asio::ip::make_address("127.0.0.1"), port);
        acceptor_.open(ep.protocol());
        acceptor_.set_option(asio::socket_base::reuse_address(true));
        acceptor_.bind(ep);
        acceptor_.listen();
        return acceptor_.local_endpoint().port();
    }

    void run() {
        accept();
        io_.run();
    }

    void stop() { io_.stop(); }

private:
    void accept() {
        acceptor_.async_accept([this](boost::beast::error_code ec, detail::tcp::socket socket) {
            if (!ec) {
                std::make_shared<detail::WsSession>(std::move(socket), cfg_, provider_,
                                                    "ws-session-" + std::to_string(++sessions_))
                    ->start();
            }
            if (acceptor_.is_open()) accept();
        });
    }

    DaemonConfig cfg_;
    std::shared_ptr<Provider> provider_;
    boost::asio::io_context io_;
    detail::tcp::acceptor acceptor_;
    std::uint64_t sessions_ = 0;
};

} // namespace genie
