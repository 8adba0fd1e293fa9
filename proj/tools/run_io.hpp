#pragma once

#include "zeropi/hamiltonian.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace zeropi::cli {

using json = nlohmann::json;

struct RunConfig {
    std::string subcommand;
    std::vector<std::string> inputs;
    std::string output_dir = ".";
    std::vector<std::string> overrides;  // key=value applied to the primary JSON input
    int workers = 1;
    std::uint64_t seed = 0;
    bool dry_run = false;
};

json read_json(const std::string& path);
// key=value pairs; nested keys use dots, values parse as JSON when possible, else as strings.
void apply_overrides(json& j, const std::vector<std::string>& overrides);

void check_keys(const json& j, const std::vector<std::string>& allowed, const std::string& what);
double number(const json& j, const std::string& key, const std::string& what);
double number_or(const json& j, const std::string& key, double fallback, const std::string& what);
int integer_or(const json& j, const std::string& key, int fallback, const std::string& what);
std::string string_or(const json& j, const std::string& key, const std::string& fallback, const std::string& what);

// Keys E_C_theta_GHz, E_C_phi_GHz, E_J_GHz, E_L_GHz, dE_J_GHz, g_phi_theta_rad_per_ns, n_g, flux_phi0,
// beta_phi, beta_theta; "preset": "fitted_device" fills the rest. "basis" is read separately.
ZeroPiParams params_from_json(const json& j);
json params_to_json(const ZeroPiParams& p);
BasisConfig basis_from_json(const json& j, const BasisConfig& fallback);

// {"from": a, "to": b, "points": n} or an explicit array.
std::vector<double> grid_from_json(const json& j, const std::string& what);

std::string format_double(double v);

class Run {
public:
    explicit Run(RunConfig cfg);

    const RunConfig& config() const { return cfg_; }
    void set_config_json(json j) { config_ = std::move(j); }
    void write_text(const std::string& name, const std::string& content);
    void write_json(const std::string& name, const json& j);
    void time(const std::string& stage, double seconds) { timings_[stage] = seconds; }
    // manifest.json: command, config hash, versions, outputs, seed, workers and timings.
    void finish();

private:
    RunConfig cfg_;
    json config_;
    std::vector<std::string> outputs_;
    std::map<std::string, double> timings_;
    std::chrono::steady_clock::time_point start_;
};

class Stopwatch {
public:
    Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_;
};

}  // namespace zeropi::cli
