// phonon-chill: rate curves, steady states, transients, toy model, validation.
//
// exit codes: 0 ok, 2 config error, 3 solver failure, 4 validation failure

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "phonon_chill/config.hpp"
#include "phonon_chill/scenarios.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kSolverError = 3;
constexpr int kValidationFailed = 4;

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw phonon_chill::ConfigError("cannot read config file " + path);
    }
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

int main(int argc, char** argv)
{
    using namespace phonon_chill;

    CLI::App app{"Laser cooling of a hot oscillator by a dissipative qudit"};
    app.set_version_flag("--version", kVersion);
    std::string command;
    std::string config_path;
    std::string out_dir;
    std::string formats;
    bool alpha_correction = false;
    std::string convention;
    app.add_option("command", command, "rates | steady | transient | toy | validate")
        ->required()
        ->check(CLI::IsMember({"rates", "steady", "transient", "toy", "validate"}));
    app.add_option("--config", config_path, "scenario file")->required();
    app.add_option("--out", out_dir, "output directory (overrides output.dir)");
    app.add_option("--format", formats, "csv,json");
    app.add_flag("--alpha-ss-correction", alpha_correction, "add |alpha_ss|^2 to n_f");
    app.add_option("--ld-convention", convention, "lindblad | text")
        ->check(CLI::IsMember({"lindblad", "text"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        ScenarioConfig cfg = parse_config(slurp(config_path));
        if (!out_dir.empty()) {
            cfg.output.dir = out_dir;
        }
        if (!formats.empty()) {
            cfg.output.formats = detail::parse_formats(formats);
        }
        if (alpha_correction) {
            cfg.command.alpha_ss_correction = true;
        }
        if (!convention.empty()) {
            cfg.solver.convention = detail::parse_convention(convention);
        }

        RunOutput run = run_command(command, cfg);
        run.manifest["config_path"] = config_path;
        run.manifest["wall_time_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (const auto& path : run.files.write(run.manifest)) {
            std::cout << path.string() << '\n';
        }
        if (!run.passed) {
            std::cerr << "validation failed; see " << run.files.manifest_name() << '\n';
            return kValidationFailed;
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kConfigError;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kSolverError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
