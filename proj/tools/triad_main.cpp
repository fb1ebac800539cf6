#include "CLI11.hpp"

#include "triad/backend.hpp"
#include "triad/harness.hpp"

#include <filesystem>
#include <iostream>
#include <memory>

namespace fs = std::filesystem;

#ifndef TRIAD_SOURCE_DIR
#define TRIAD_SOURCE_DIR "."
#endif

int main(int argc, char** argv) {
    CLI::App app{"triad: persistent-agent runtime and sandbox harness"};

    std::string scenario_path;
    std::uint64_t seed = 7;
    std::int64_t duration = 0;
    std::string backend_name = "scripted";
    std::string out_dir = "out";
    std::string metrics_csv;
    std::string assets_dir;
    bool no_intrinsic = false;

    app.add_option("--scenario", scenario_path, "Scenario descriptor file")->required();
    app.add_option("--seed", seed, "Deterministic run seed");
    app.add_option("--duration", duration, "Run length in virtual minutes (0 = scenario default)");
    app.add_option("--backend", backend_name, "Cognition backend: scripted|remote")
        ->check(CLI::IsMember({"scripted", "remote"}));
    app.add_option("--out", out_dir, "Output directory (journal lands in <out>/journal)");
    app.add_option("--metrics-csv", metrics_csv, "Metrics CSV path (default <out>/metrics.csv)");
    app.add_option("--assets", assets_dir, "Prompt asset directory");
    app.add_flag("--no-intrinsic", no_intrinsic, "Disable intrinsic goal generation (reactive baseline)");

    CLI11_PARSE(app, argc, argv);

    try {
        triad::Scenario scenario = triad::load_scenario(scenario_path);

        std::unique_ptr<triad::Backend> backend;
        if (backend_name == "remote") {
            backend = std::make_unique<triad::RemoteBackend>(triad::RemoteBackend::from_environment());
            const auto health = backend->healthcheck();
            if (!health.healthy) {
                std::cerr << "remote backend unhealthy: " << health.reason << "\n";
                return 2;
            }
            std::cerr << "remote backend healthy (" << health.round_trip_ms << " ms)\n";
        } else {
            backend = std::make_unique<triad::ScriptedBackend>();
        }

        const fs::path assets_root = assets_dir.empty()
                                         ? fs::path(TRIAD_SOURCE_DIR) / "assets" / "prompts"
                                         : fs::path(assets_dir);
        triad::AssetStore assets(assets_root);

        triad::RunnerConfig config;
        config.seed = seed;
        config.duration = duration;
        config.no_intrinsic = no_intrinsic;
        config.out_dir = out_dir;

        const triad::RunResult result = triad::run_scenario(scenario, *backend, assets, config);

        const fs::path csv = metrics_csv.empty() ? fs::path(out_dir) / "metrics.csv"
                                                 : fs::path(metrics_csv);
        triad::export_csv(result.metrics, csv);

        std::cout << "scenario: " << scenario.name << "\n";
        std::cout << "journal:  " << result.journal_dir.string() << "\n";
        std::cout << "metrics:  " << csv.string() << "\n";
        std::cout << "tasks:    " << result.metrics.total_tasks << " over "
                  << result.metrics.total_runtime << " virtual minutes\n";
        for (const auto& seg : result.metrics.segments)
            std::cout << "  [" << seg.segment_start << ".." << (seg.segment_start + 359)
                      << "] extrinsic=" << seg.extrinsic << " intrinsic=" << seg.intrinsic << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
