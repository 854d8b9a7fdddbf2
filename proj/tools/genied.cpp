// genied: proactive suggestion daemon speaking JSON-RPC 2.0 over stdio or WebSocket.

#include <csignal>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "genie/config.hpp"
#include "genie/daemon.hpp"

int main(int argc, char** argv) {
    CLI::App app{"genied - proactive coding suggestion daemon"};
    bool use_stdio = false;
    std::optional<unsigned short> ws_port;
    std::string config_path;
    bool mock = false;

    auto* stdio_opt = app.add_flag("--stdio", use_stdio, "Serve one session on stdin/stdout (Content-Length framing)");
    auto* ws_opt = app.add_option("--ws", ws_port, "Serve WebSocket sessions on 127.0.0.1:<port>");
    stdio_opt->excludes(ws_opt);
    app.add_option("--config", config_path, "Daemon config document (JSON)")->check(CLI::ExistingFile);
    app.add_flag("--mock", mock, "Use the deterministic mock provider instead of the HTTP backend");
    CLI11_PARSE(app, argc, argv);

    if (!use_stdio && !ws_port) {
        std::cerr << "genied: one of --stdio or --ws <port> is required\n";
        return 2;
    }

    try {
        auto cfg = config_path.empty() ? genie::DaemonConfig{} : genie::DaemonConfig::load(config_path);
        if (mock) cfg.use_mock = true;
        if (!cfg.use_mock && genie::HttpProviderConfig::api_key_from_env().empty()) {
            std::cerr << "genied: warning: GENIED_API_KEY is not set\n";
        }
        auto provider = genie::make_provider(cfg);

        if (use_stdio) {
            std::ios::sync_with_stdio(false);
            genie::StdioServer server(cfg, provider);
            return server.run(std::cin, std::cout);
        }
        genie::WsServer server(cfg, provider);
        const auto port = server.bind(*ws_port);
        std::cerr << "genied: listening on ws://127.0.0.1:" << port << "\n";
        server.run();
    } catch (const genie::Error& e) {
        std::cerr << "genied: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "genied: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
