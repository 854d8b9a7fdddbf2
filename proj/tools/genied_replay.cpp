// genied-replay: deterministic trace replay with the mock provider and a cost report.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "genie/config.hpp"
#include "genie/replay.hpp"

int main(int argc, char** argv) {
    CLI::App app{"genied-replay - replay a JSONL event trace on a virtual clock"};
    std::string trace_path;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string report = "text";

    app.add_option("trace", trace_path, "Trace file (JSONL)")->required()->check(CLI::ExistingFile);
    app.add_option("--config", config_path, "Daemon config document (JSON)")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Mock provider seed (overrides provider.mock_seed)");
    app.add_option("--report", report, "Report format")->check(CLI::IsMember({"json", "text"}));
    CLI11_PARSE(app, argc, argv);

    try {
        auto cfg = config_path.empty() ? genie::DaemonConfig{} : genie::DaemonConfig::load(config_path);
        cfg.use_mock = true;
        if (seed) cfg.mock_seed = *seed;
        const auto result = genie::replay_file(trace_path, cfg);
        if (report == "json") {
            std::cout << result.to_json().dump(2) << "\n";
        } else {
            std::cout << result.to_text();
        }
    } catch (const genie::Error& e) {
        std::cerr << "genied-replay: " << e.what() << "\n";
        return e.code() == genie::ErrorCode::MalformedTrace || e.code() == genie::ErrorCode::NonMonotonicTime ? 3 : 1;
    }
    return 0;
}
