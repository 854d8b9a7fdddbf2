// genied-trace: records a live stdio session into a replayable JSONL trace.
//
//   genied-trace record --out session.jsonl -- genied --stdio --config genied.json
//
// Frames from the client are forwarded to the daemon untouched and logged as
// {"t_ms", "event": method, "payload": params}. Daemon output passes through.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "genie/rpc.hpp"

namespace {

bool write_all(int fd, const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
        const auto n = ::write(fd, data.data() + off, data.size() - off);
        if (n <= 0) return false;
        off += static_cast<std::size_t>(n);
    }
    return true;
}

// Methods the replay driver issues on its own.
bool recorded(const std::string& method) { return method != "initialize" && method != "shutdown"; }

int record(const std::string& out_path, const std::vector<std::string>& command) {
    std::ofstream trace(out_path, std::ios::trunc);
    if (!trace) {
        std::cerr << "genied-trace: cannot write " << out_path << "\n";
        return 1;
    }

    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
        std::perror("genied-trace: pipe");
        return 1;
    }
    const pid_t pid = ::fork();
    if (pid < 0) {
        std::perror("genied-trace: fork");
        return 1;
    }
    if (pid == 0) {
        ::dup2(to_child[0], STDIN_FILENO);
        ::dup2(from_child[1], STDOUT_FILENO);
        ::close(to_child[0]);
        ::close(to_child[1]);
        ::close(from_child[0]);
        ::close(from_child[1]);
        std::vector<char*> argv;
        for (const auto& a : command) argv.push_back(const_cast<char*>(a.c_str()));
        argv.push_back(nullptr);
        ::execvp(argv[0], argv.data());
        std::perror("genied-trace: exec");
        std::_Exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    std::signal(SIGPIPE, SIG_IGN);

    std::thread pump([fd = from_child[0]] {
        char buf[4096];
        for (;;) {
            const auto n = ::read(fd, buf, sizeof buf);
            if (n <= 0) break;
            std::cout.write(buf, n);
            std::cout.flush();
        }
        ::close(fd);
    });

    const auto origin = std::chrono::steady_clock::now();
    std::int64_t last = 0;
    std::size_t lines = 0;
    for (;;) {
        auto frame = genie::rpc::read_frame(std::cin);
        if (frame.status != genie::rpc::FrameStatus::Ok) break;
        const auto t = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - origin)
                           .count();
        last = t;
        auto msg = nlohmann::json::parse(frame.body, nullptr, false);
        if (msg.is_object() && msg.contains("method") && msg["method"].is_string()) {
            const auto method = msg["method"].get<std::string>();
            if (recorded(method)) {
                nlohmann::json params = msg.value("params", nlohmann::json::object());
                if (!params.is_object()) params = nlohmann::json::object();
                trace << nlohmann::json{{"t_ms", t}, {"event", method}, {"payload", params}}.dump() << "\n";
                trace.flush();
                ++lines;
            }
        }
        if (!write_all(to_child[1], "Content-Length: " + std::to_string(frame.body.size()) + "\r\n\r\n" + frame.body))
            break;
    }
    ::close(to_child[1]);
    int status = 0;
    ::waitpid(pid, &status, 0);
    pump.join();

    trace << nlohmann::json{{"t_ms", last}, {"event", "end"}, {"payload", nlohmann::json::object()}}.dump() << "\n";
    std::cerr << "genied-trace: wrote " << lines << " events to " << out_path << "\n";
    return WIFEXITED(status) ? WEXITSTATUS(status) : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"genied-trace - record live RPC sessions as JSONL traces"};
    app.require_subcommand(1);
    auto* rec = app.add_subcommand("record", "Proxy a stdio daemon and log client events");
    std::string out_path = "trace.jsonl";
    std::vector<std::string> command;
    rec->add_option("--out,-o", out_path, "Trace file to write");
    rec->add_option("command", command, "Daemon command line, after --")->required();
    CLI11_PARSE(app, argc, argv);
    return record(out_path, command);
}
