#include "commands.hpp"

#include "zeropi/errors.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    using namespace zeropi;
    CLI::App app{"zeropi: exact diagonalisation, tight binding, Raman dynamics and spectrum fitting for the 0-pi qubit"};
    app.require_subcommand(1);
    app.fallthrough();

    cli::RunConfig cfg;
    app.add_option("--output-dir,-o", cfg.output_dir, "directory for outputs and manifest.json");
    app.add_option("--workers,-j", cfg.workers, "worker threads");
    app.add_option("--seed", cfg.seed, "random seed");
    app.add_option("--set", cfg.overrides, "override key=value in the primary JSON input");
    app.add_flag("--dry-run", cfg.dry_run, "validate inputs without computing");

    std::function<int()> action;
    cli::register_commands(app, cfg, action);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        return action();
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << "not converged: " << e.what() << "\n";
        return 4;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
