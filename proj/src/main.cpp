#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mtsim/config.hpp"
#include "mtsim/errors.hpp"
#include "mtsim/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"mtsim: transmon quasicharge qubits coupled through Kitaev-chain junctions"};
    app.get_formatter()->column_width(28);

    std::string experiment, config_path, out_dir;
    std::vector<std::string> overrides;
    app.add_option("experiment", experiment,
                   "one of bands, junction-spectrum, rabi, gate, leakage, two-qubit, verify")
        ->required();
    app.add_option("--config", config_path, "flat key = value file, # comments");
    app.add_option("--out", out_dir, "output directory (overrides out_dir)");
    app.add_option("--set", overrides, "key=value override, repeatable")
        ->take_all();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const mtsim::RunConfig cfg =
            mtsim::make_run_config(experiment, config_path, overrides, out_dir);
        const mtsim::RunReport report = mtsim::run_experiment(cfg);
        if (!report.summary.empty()) std::cout << report.summary << "\n";
        for (const auto& path : report.outputs) std::cout << "wrote " << path << "\n";
        if (report.verify_failures > 0) {
            std::cerr << report.verify_failures << " verify suite(s) failed\n";
            return 1;
        }
        return 0;
    } catch (const mtsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const mtsim::PhysicsGuard& e) {
        std::cerr << "physics guard: " << e.what() << "\n";
        return 3;
    } catch (const mtsim::ConvergenceError& e) {
        std::cerr << "convergence failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
