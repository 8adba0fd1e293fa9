#pragma once

#include "run_io.hpp"

#include <CLI11.hpp>

#include <functional>

namespace zeropi::cli {

// Adds every subcommand to app; the parsed subcommand stores its body in action.
void register_commands(CLI::App& app, RunConfig& cfg, std::function<int()>& action);

}  // namespace zeropi::cli
