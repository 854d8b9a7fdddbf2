#pragma once

// Runs a command with pipes on stdin/stdout; stdout bytes are pumped into a
// BytePipe so FrameReader can be used on them.

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <string>
#include <thread>
#include <vector>

#include "pipe_stream.hpp"

namespace genie::props {

class ChildProcess {
public:
    explicit ChildProcess(const std::vector<std::string>& argv) {
        int in[2];
        int out[2];
        if (::pipe(in) != 0 || ::pipe(out) != 0) return;
        pid_ = ::fork();
        if (pid_ == 0) {
            ::dup2(in[0], STDIN_FILENO);
            ::dup2(out[1], STDOUT_FILENO);
            ::close(in[0]);
            ::close(in[1]);
            ::close(out[0]);
            ::close(out[1]);
            std::vector<char*> args;
            for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
            args.push_back(nullptr);
            ::execv(args[0], args.data());
            ::_exit(127);
        }
        ::close(in[0]);
        ::close(out[1]);
        stdin_ = in[1];
        pump_ = std::thread([this, fd = out[0]] {
            char buf[4096];
            for (;;) {
                const auto n = ::read(fd, buf, sizeof buf);
                if (n <= 0) break;
                stdout_.write(std::string(buf, static_cast<std::size_t>(n)));
            }
            ::close(fd);
            stdout_.close();
        });
    }

    ChildProcess(const ChildProcess&) = delete;
    ChildProcess& operator=(const ChildProcess&) = delete;

    ~ChildProcess() {
        close_stdin();
        if (pid_ > 0 && !waited_) {
            ::kill(pid_, SIGKILL);
            ::waitpid(pid_, nullptr, 0);
        }
        if (pump_.joinable()) pump_.join();
    }

    bool started() const { return pid_ > 0 && stdin_ >= 0; }

    void send(const std::string& bytes) {
        std::size_t off = 0;
        while (off < bytes.size()) {
            const auto n = ::write(stdin_, bytes.data() + off, bytes.size() - off);
            if (n <= 0) return;
            off += static_cast<std::size_t>(n);
        }
    }

    void close_stdin() {
        if (stdin_ >= 0) ::close(stdin_);
        stdin_ = -1;
    }

    /// Exit status, or -1 when the child did not exit normally.
    int wait() {
        int status = 0;
        ::waitpid(pid_, &status, 0);
        waited_ = true;
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    BytePipe& output() { return stdout_; }

private:
    pid_t pid_ = -1;
    int stdin_ = -1;
    bool waited_ = false;
    BytePipe stdout_;
    std::thread pump_;
};

} // namespace genie::props
