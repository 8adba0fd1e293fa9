#include "run_io.hpp"

#include "zeropi/errors.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace zeropi::cli {

namespace fs = std::filesystem;

json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ValidationError(path + ": cannot open");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void apply_overrides(json& j, const std::vector<std::string>& overrides)
{
    for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw ValidationError("override '" + kv + "' must be key=value");
        const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
        json v = json::parse(value, nullptr, false);
        if (v.is_discarded()) v = value;
        json* node = &j;
        std::stringstream ss(key);
        std::string part;
        std::vector<std::string> parts;
        while (std::getline(ss, part, '.')) parts.push_back(part);
        for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
            if (!node->is_object()) throw ValidationError("override '" + key + "': '" + parts[i] + "' is not an object");
            node = &(*node)[parts[i]];
        }
        (*node)[parts.back()] = v;
    }
}

void check_keys(const json& j, const std::vector<std::string>& allowed, const std::string& what)
{
    if (!j.is_object()) throw ValidationError(what + ": expected a JSON object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items())
        if (!ok.count(k)) throw ValidationError(what + ": unknown field '" + k + "'");
}

double number(const json& j, const std::string& key, const std::string& what)
{
    if (!j.contains(key)) throw ValidationError(what + ": missing field '" + key + "'");
    if (!j.at(key).is_number()) throw ValidationError(what + ": field '" + key + "' must be a number");
    const double v = j.at(key).get<double>();
    if (!std::isfinite(v)) throw ValidationError(what + ": field '" + key + "' must be finite");
    return v;
}

double number_or(const json& j, const std::string& key, double fallback, const std::string& what)
{
    return j.contains(key) ? number(j, key, what) : fallback;
}

int integer_or(const json& j, const std::string& key, int fallback, const std::string& what)
{
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer()) throw ValidationError(what + ": field '" + key + "' must be an integer");
    return j.at(key).get<int>();
}

std::string string_or(const json& j, const std::string& key, const std::string& fallback, const std::string& what)
{
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_string()) throw ValidationError(what + ": field '" + key + "' must be a string");
    return j.at(key).get<std::string>();
}

ZeroPiParams params_from_json(const json& j)
{
    const std::string what = "params";
    check_keys(j, {"preset", "E_C_theta_GHz", "E_C_phi_GHz", "E_J_GHz", "E_L_GHz", "dE_J_GHz",
                   "g_phi_theta_rad_per_ns", "n_g", "flux_phi0", "beta_phi", "beta_theta", "basis"},
               what);
    ZeroPiParams p;
    const std::string preset = string_or(j, "preset", "", what);
    if (preset == "fitted_device") {
        p = fitted_device_params();
    } else if (!preset.empty()) {
        throw ValidationError(what + ": unknown preset '" + preset + "'");
    } else {
        p.E_C_theta = number(j, "E_C_theta_GHz", what);
        p.E_C_phi = number(j, "E_C_phi_GHz", what);
        p.E_J = number(j, "E_J_GHz", what);
        p.E_L = number(j, "E_L_GHz", what);
        p.dE_J = p.g_phi_theta = p.beta_phi = p.beta_theta = 0.0;
    }
    p.E_C_theta = number_or(j, "E_C_theta_GHz", p.E_C_theta, what);
    p.E_C_phi = number_or(j, "E_C_phi_GHz", p.E_C_phi, what);
    p.E_J = number_or(j, "E_J_GHz", p.E_J, what);
    p.E_L = number_or(j, "E_L_GHz", p.E_L, what);
    p.dE_J = number_or(j, "dE_J_GHz", p.dE_J, what);
    p.g_phi_theta = number_or(j, "g_phi_theta_rad_per_ns", p.g_phi_theta, what);
    p.n_g = number_or(j, "n_g", p.n_g, what);
    p.flux = number_or(j, "flux_phi0", p.flux, what);
    p.beta_phi = number_or(j, "beta_phi", p.beta_phi, what);
    p.beta_theta = number_or(j, "beta_theta", p.beta_theta, what);
    p.validate();
    return p;
}

json params_to_json(const ZeroPiParams& p)
{
    return json{{"E_C_theta_GHz", p.E_C_theta},
                {"E_C_phi_GHz", p.E_C_phi},
                {"E_J_GHz", p.E_J},
                {"E_L_GHz", p.E_L},
                {"dE_J_GHz", p.dE_J},
                {"g_phi_theta_rad_per_ns", p.g_phi_theta},
                {"n_g", p.n_g},
                {"flux_phi0", p.flux},
                {"beta_phi", p.beta_phi},
                {"beta_theta", p.beta_theta}};
}

BasisConfig basis_from_json(const json& j, const BasisConfig& fallback)
{
    if (!j.contains("basis")) return fallback;
    const json& b = j.at("basis");
    check_keys(b, {"n_theta_max", "n_phi_max"}, "basis");
    BasisConfig out{integer_or(b, "n_theta_max", fallback.n_theta_max, "basis"),
                    integer_or(b, "n_phi_max", fallback.n_phi_max, "basis")};
    out.validate();
    return out;
}

std::vector<double> grid_from_json(const json& j, const std::string& what)
{
    if (j.is_array()) {
        std::vector<double> out;
        for (const auto& v : j) {
            if (!v.is_number()) throw ValidationError(what + ": grid entries must be numbers");
            out.push_back(v.get<double>());
        }
        if (out.empty()) throw ValidationError(what + ": empty grid");
        return out;
    }
    check_keys(j, {"from", "to", "points"}, what);
    const int n = integer_or(j, "points", 0, what);
    if (n < 1) throw ValidationError(what + ": points must be >= 1");
    return linspace(number(j, "from", what), number(j, "to", what), n);
}

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

Run::Run(RunConfig cfg) : cfg_(std::move(cfg)), start_(std::chrono::steady_clock::now())
{
    if (cfg_.workers < 1) throw ValidationError("--workers must be >= 1");
    std::error_code ec;
    fs::create_directories(cfg_.output_dir, ec);
    if (ec) throw ValidationError("output directory " + cfg_.output_dir + ": " + ec.message());
    const fs::path probe = fs::path(cfg_.output_dir) / ".zeropi_write_probe";
    {
        std::ofstream out(probe);
        if (!out) throw ValidationError("output directory " + cfg_.output_dir + " is not writable");
    }
    fs::remove(probe, ec);
}

void Run::write_text(const std::string& name, const std::string& content)
{
    const fs::path path = fs::path(cfg_.output_dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << content;
    outputs_.push_back(name);
}

void Run::write_json(const std::string& name, const json& j) { write_text(name, j.dump(2) + "\n"); }

void Run::finish()
{
    const std::string canonical = config_.dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream hash;
    hash << std::hex << std::setw(16) << std::setfill('0') << h;

    json m;
    m["command"] = cfg_.subcommand;
    m["inputs"] = cfg_.inputs;
    m["config"] = config_;
    m["config_hash"] = hash.str();
    m["seed"] = cfg_.seed;
    m["workers"] = cfg_.workers;
    m["dry_run"] = cfg_.dry_run;
    m["outputs"] = outputs_;
    m["versions"] = {{"zeropi", "0.1.0"},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"compiler", __VERSION__}};
    json t = timings_;
    t["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    m["timings_s"] = t;
    const fs::path path = fs::path(cfg_.output_dir) / "manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << m.dump(2) << "\n";
}

}  // namespace zeropi::cli
