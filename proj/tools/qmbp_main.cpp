// Command-line front end: reads a JSON run configuration, executes the
// requested pipelines, writes report.json plus any requested CSV curves, and
// exits nonzero if any cross-pipeline consistency check fails.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qmbp/errors.hpp"
#include "qmbp/report.hpp"

int main(int argc, char** argv) {
    CLI::App app{"decay-parameter pipelines for quadratic branching rate sequences"};

    std::string config_path;
    std::string out_dir;
    std::vector<std::string> pipelines;
    std::uint64_t seed = 0;
    bool seed_set = false;

    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--out", out_dir, "output directory (overrides config)");
    app.add_option("--pipeline", pipelines,
                   "pipeline to run (repeatable; overrides config): "
                   "validate, hardy, bounds, eigen, ctmc, all");
    app.add_option("--seed", seed, "random seed (overrides config)")
        ->each([&](const std::string&) { seed_set = true; });

    CLI11_PARSE(app, argc, argv);

    try {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) {
            std::cerr << "error: cannot open config " << config_path << "\n";
            return 2;
        }
        std::ostringstream text;
        text << in.rdbuf();

        qmbp::RunConfig config = qmbp::RunConfig::from_json_text(text.str());
        if (!out_dir.empty()) config.out_dir = out_dir;
        if (!pipelines.empty()) {
            config.pipelines.clear();
            for (const auto& p : pipelines) config.pipelines.insert(p);
            if (config.pipelines.count("all"))
                config.pipelines = {"validate", "hardy", "bounds", "eigen", "ctmc"};
            config.pipelines.insert("validate");
        }
        if (seed_set) config.seed = seed;

        const qmbp::RunReport report = qmbp::run(config);
        const auto path = qmbp::write_report(report, config.out_dir);
        std::cout << report.json;
        std::cerr << "report written to " << path.string() << "\n";
        if (report.checks_run > 0 && !report.all_checks_pass) {
            std::cerr << "FAILED: " << report.checks_run << " consistency checks ran, not all passed\n";
            return 1;
        }
        return 0;
    } catch (const qmbp::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 3;
    }
}
