#include "commands.hpp"

#include "zeropi/circuitq.hpp"
#include "zeropi/errors.hpp"
#include "zeropi/fitcore.hpp"
#include "zeropi/raman.hpp"
#include "zeropi/spectroscopy.hpp"
#include "zeropi/tightbinding.hpp"
#include "zeropi/units.hpp"

#include <cmath>
#include <iostream>
#include <memory>
#include <sstream>

namespace zeropi::cli {

namespace {

using units::two_pi;

json load_primary(const RunConfig& cfg)
{
    json j = read_json(cfg.inputs.at(0));
    apply_overrides(j, cfg.overrides);
    return j;
}

int dry_run_done(Run& run)
{
    run.finish();
    std::cout << run.config().subcommand << ": inputs valid\n";
    return 0;
}

// ---------------------------------------------------------------- quantize

circuitq::Vector4 vector4(const json& j, const std::string& key, const std::string& what)
{
    if (!j.contains(key)) throw ValidationError(what + ": missing field '" + key + "'");
    const json& a = j.at(key);
    if (!a.is_array() || a.size() != 4) throw ValidationError(what + ": field '" + key + "' must hold 4 numbers");
    circuitq::Vector4 v;
    for (int i = 0; i < 4; ++i) {
        if (!a[i].is_number()) throw ValidationError(what + ": field '" + key + "' must hold 4 numbers");
        v[i] = a[i].get<double>();
    }
    return v;
}

circuitq::CapacitanceNetwork network_from_json(const json& j)
{
    const std::string what = "network";
    check_keys(j, {"preset", "C_fF", "C_J_fF", "C_L_x_fF", "C_J_x_fF", "C_r_fF", "C_0_fF", "E_J_GHz", "E_L_GHz",
                   "dE_J_GHz"},
               what);
    circuitq::CapacitanceNetwork n;
    const std::string preset = string_or(j, "preset", "", what);
    if (preset == "measured_device") {
        n = circuitq::measured_device_network();
        n.C = number_or(j, "C_fF", n.C, what);
        n.C_J = number_or(j, "C_J_fF", n.C_J, what);
        n.C_L_x = number_or(j, "C_L_x_fF", n.C_L_x, what);
        n.C_J_x = number_or(j, "C_J_x_fF", n.C_J_x, what);
        if (j.contains("C_r_fF")) n.C_r = vector4(j, "C_r_fF", what);
        if (j.contains("C_0_fF")) n.C_0 = vector4(j, "C_0_fF", what);
        n.E_J = number_or(j, "E_J_GHz", n.E_J, what);
        n.E_L = number_or(j, "E_L_GHz", n.E_L, what);
    } else if (!preset.empty()) {
        throw ValidationError(what + ": unknown preset '" + preset + "'");
    } else {
        n.C = number(j, "C_fF", what);
        n.C_J = number(j, "C_J_fF", what);
        n.C_L_x = number(j, "C_L_x_fF", what);
        n.C_J_x = number(j, "C_J_x_fF", what);
        n.C_r = vector4(j, "C_r_fF", what);
        n.C_0 = vector4(j, "C_0_fF", what);
        n.E_J = number(j, "E_J_GHz", what);
        n.E_L = number(j, "E_L_GHz", what);
    }
    n.dE_J = number_or(j, "dE_J_GHz", preset.empty() ? 0.0 : n.dE_J, what);
    n.validate();
    return n;
}

void add_quantize(CLI::App& app, RunConfig& cfg, std::function<int()>& action)
{
    auto* sub = app.add_subcommand("quantize", "Mode charging energies of a four-node capacitance network");
    auto network = std::make_shared<std::string>();
    auto scale = std::make_shared<double>(1.0);
    sub->add_option("network", *network, "network JSON")->required();
    sub->add_option("--scale-caps", *scale, "multiply every capacitance");
    sub->callback([&cfg, &action, network, scale] {
        action = [&cfg, network, scale] {
            RunConfig c = cfg;
            c.subcommand = "quantize";
            c.inputs = {*network};
            if (!(*scale > 0.0) || !std::isfinite(*scale)) throw ValidationError("--scale-caps must be positive");
            const json j = load_primary(c);
            const auto net = network_from_json(j).scaled(*scale);
            Run run(c);
            run.set_config_json({{"network", j}, {"scale_caps", *scale}});
            if (c.dry_run) return dry_run_done(run);
            Stopwatch sw;
            const auto e = circuitq::quantize(net);
            const auto bare = circuitq::quantize(net.without_cross_caps());
            run.time("quantize", sw.seconds());
            run.write_json("quantize.json", {{"E_C_theta_MHz", e.E_C_theta * 1e3},
                                             {"E_C_phi_MHz", e.E_C_phi * 1e3},
                                             {"E_C_zeta_MHz", e.E_C_zeta * 1e3},
                                             {"omega_zeta_2pi_MHz", e.omega_zeta / two_pi * 1e3},
                                             {"g_phi_theta_rad_per_ns", e.g_phi_theta},
                                             {"beta_phi", e.beta_phi},
                                             {"beta_theta", e.beta_theta},
                                             {"E_J_GHz", net.E_J},
                                             {"E_L_GHz", net.E_L},
                                             {"scale_caps", *scale},
                                             {"without_cross_caps",
                                              {{"E_C_theta_MHz", bare.E_C_theta * 1e3},
                                               {"E_C_phi_MHz", bare.E_C_phi * 1e3},
                                               {"beta_phi", bare.beta_phi},
                                               {"beta_theta", bare.beta_theta}}}});
            run.finish();
            return 0;
        };
    });
}

// ---------------------------------------------------------------- spectrum

struct SpectrumArgs {
    std::string params;
    std::string axis = "flux";
    int points = 51;
    std::optional<double> from, to;
    int k = 12;
    int initial = 0;
    bool branches = false;
    bool no_track = false;
};

void add_spectrum(CLI::App& app, RunConfig& cfg, std::function<int()>& action)
{
    auto* sub = app.add_subcommand("spectrum", "Energy levels and transitions along a flux or charge sweep");
    auto a = std::make_shared<SpectrumArgs>();
    sub->add_option("params", a->params, "parameter JSON")->required();
    sub->add_option("--axis", a->axis, "flux or charge")->check(CLI::IsMember({"flux", "charge"}));
    sub->add_option("--points", a->points, "grid points");
    sub->add_option("--from", a->from, "first axis value (flux quanta or 2e)");
    sub->add_option("--to", a->to, "last axis value");
    sub->add_option("--k", a->k, "levels kept");
    sub->add_option("--initial", a->initial, "initial state of the transition table");
    sub->add_flag("--parity-branches", a->branches, "charge sweep at n_g and n_g + 1/2");
    sub->add_flag("--no-track", a->no_track, "energy order instead of overlap tracking");
    sub->callback([&cfg, &action, a] {
        action = [&cfg, a] {
            RunConfig c = cfg;
            c.subcommand = "spectrum";
            c.inputs = {a->params};
            const json j = load_primary(c);
            const ZeroPiParams p = params_from_json(j);
            const bool flux = a->axis == "flux";
            if (a->points < 1) throw ValidationError("--points must be >= 1");
            if (a->k < 2) throw ValidationError("--k must be >= 2");
            if (a->initial < 0 || a->initial >= a->k) throw ValidationError("--initial must lie in [0, k)");
            const double lo = a->from.value_or(0.0), hi = a->to.value_or(flux ? 0.5 : 1.0);
            const auto grid = linspace(lo, hi, a->points);
            SweepOptions o;
            o.k = a->k;
            o.initial = {a->initial};
            o.parity_branches = a->branches;
            o.track = !a->no_track;
            o.basis = basis_from_json(j, BasisConfig{});
            o.workers = c.workers;
            Run run(c);
            run.set_config_json({{"params", j},
                                 {"axis", a->axis},
                                 {"grid", grid},
                                 {"k", a->k},
                                 {"initial", a->initial},
                                 {"parity_branches", a->branches},
                                 {"track", o.track}});
            if (c.dry_run) return dry_run_done(run);
            Stopwatch sw;
            const SweepResult r = sweep(p, flux ? SweepAxis::flux : SweepAxis::charge, grid, o);
            run.time("sweep", sw.seconds());

            std::ostringstream lv, tr;
            lv << "axis_value,branch,flux_phi0,ng,state,energy_rank,energy_GHz\n";
            tr << "axis_value,branch,flux_phi0,ng,from,to,frequency_GHz,drive_weight,abs_n_theta,abs_n_phi\n";
            for (const auto& pt : r.points) {
                const std::string head = format_double(pt.axis_value) + "," + to_string(pt.branch) + "," +
                                         format_double(pt.flux) + "," + format_double(pt.n_g) + ",";
                for (int i = 0; i < pt.energies.size(); ++i)
                    lv << head << i << "," << pt.order[i] << "," << format_double(pt.energies[i]) << "\n";
                for (const auto& t : pt.transitions)
                    tr << head << t.from << "," << t.to << "," << format_double(t.frequency) << ","
                       << format_double(t.drive_weight) << "," << format_double(std::abs(t.me_theta)) << ","
                       << format_double(std::abs(t.me_phi)) << "\n";
            }
            run.write_text("spectrum.csv", lv.str());
            run.write_text("transitions.csv", tr.str());
            run.finish();
            return 0;
        };
    });
}

// ---------------------------------------------------------------- matrix elements

struct MatrixArgs {
    std::string params;
    int i = 0;
    int j = 1;
    std::string op = "n_theta";
    int points = 64;
};

void add_matrix_elements(CLI::App& app, RunConfig& cfg, std::function<int()>& action)
{
    auto* sub = app.add_subcommand("matrix-elements", "Tracked |<i|n|j>| over one offset-charge period");
    auto a = std::make_shared<MatrixArgs>();
    sub->add_option("params", a->params, "parameter JSON")->required();
    sub->add_option("--i", a->i, "first state (energy rank at n_g = 0)");
    sub->add_option("--j", a->j, "second state");
    sub->add_option("--operator", a->op, "n_theta or n_phi")->check(CLI::IsMember({"n_theta", "n_phi"}));
    sub->add_option("--points", a->points, "n_g points in [0, 1)");
    sub->callback([&cfg, &action, a] {
        action = [&cfg, a] {
            RunConfig c = cfg;
            c.subcommand = "matrix-elements";
            c.inputs = {a->params};
            const json j = load_primary(c);
            const ZeroPiParams p = params_from_json(j);
            if (a->points < 16) throw ValidationError("--points must be >= 16");
            if (a->i < 0 || a->j < 0 || a->i == a->j) throw ValidationError("--i and --j must be distinct and >= 0");
            const BasisConfig b = basis_from_json(j, tight_binding_basis);
            const auto grid = ng_grid(a->points);
            Run run(c);
            run.set_config_json(
                {{"params", j}, {"i", a->i}, {"j", a->j}, {"operator", a->op}, {"points", a->points}});
            if (c.dry_run) return dry_run_done(run);
            Stopwatch sw;
            const auto me = matrix_element_scan(p, a->i, a->j, grid,
                                                a->op == "n_theta" ? ChargeOperator::n_theta : ChargeOperator::n_phi,
                                                b, c.workers);
            run.time("scan", sw.seconds());
            std::ostringstream os;
            os << "ng,abs_matrix_element\n";
            for (std::size_t k = 0; k < grid.size(); ++k) os << format_double(grid[k]) << "," << format_double(me[k]) << "\n";
            run.write_text("matrix_elements.csv", os.str());
            run.finish();
            return 0;
        };
    });
}

// ---------------------------------------------------------------- wannier

struct WannierArgs {
    std::string params;
    std::optional<int> band;
    std::string state;
    std::string parity = "none";
    int ng_points = 16;
    bool no_grid = false;
};

int find_state(const ZeroPiParams& p, const std::string& name)
{
    ZeroPiParams q = p;
    q.n_g = 0.0;
    Spectrum s = solve(q, BasisConfig{}, 12);
    label_spectrum(s, q.flux);
    for (int i = 0; i < s.size(); ++i)
        if (s.labels[i].name() == name) return i;
    throw ValidationError("wannier: no state labelled '" + name + "' among the lowest 12 at n_g = 0");
}

void add_wannier(CLI::App& app, RunConfig& cfg, std::function<int()>& action)
{
    auto* sub = app.add_subcommand("wannier", "Bloch family, Wannier function and hopping report for one band");
    auto a = std::make_shared<WannierArgs>();
    sub->add_option("params", a->params, "parameter JSON")->required();
    auto* band = sub->add_option("--band", a->band, "energy rank at n_g = 0");
    sub->add_option("--state", a->state, "state label at n_g = 0, e.g. pi_dtheta+")->excludes(band);
    sub->add_option("--parity", a->parity, "follow the phi-reflection eigenstate: plus, minus or none")
        ->check(CLI::IsMember({"plus", "minus", "none"}));
    sub->add_option("--ng-points", a->ng_points, "Bloch grid points");
    sub->add_flag("--no-grid", a->no_grid, "skip the Wannier grid CSV");
    sub->callback([&cfg, &action, a] {
        action = [&cfg, a] {
            RunConfig c = cfg;
            c.subcommand = "wannier";
            c.inputs = {a->params};
            const json j = load_primary(c);
            const ZeroPiParams p = params_from_json(j);
            if (!a->band && a->state.empty()) throw ValidationError("wannier: give --band or --state");
            if (a->band && *a->band < 0) throw ValidationError("--band must be >= 0");
            if (a->ng_points < 16) throw ValidationError("--ng-points must be >= 16");
            BlochOptions o;
            o.basis = basis_from_json(j, tight_binding_basis);
            o.resolve_parity = a->parity == "plus" ? Parity::plus : a->parity == "minus" ? Parity::minus : Parity::none;
            o.workers = c.workers;
            Run run(c);
            run.set_config_json({{"params", j},
                                 {"band", a->band ? json(*a->band) : json(nullptr)},
                                 {"state", a->state},
                                 {"parity", a->parity},
                                 {"ng_points", a->ng_points}});
            if (c.dry_run) return dry_run_done(run);
            Stopwatch sw;
            const int b = a->band ? *a->band : find_state(p, a->state);
            const auto grid = ng_grid(a->ng_points);
            const BlochFamily f = bloch_states(p, b, grid, o);
            run.time("bloch", sw.seconds());
            const CosineFit fit = fit_cosine_band(grid, f.energies);
            const Wannier2D w = wannier_function(f, 0);
            const BandEnergies be = wannier_band_energies(f, w);
            run.time("wannier", sw.seconds());

            json report{{"band", b},
                        {"state", a->state},
                        {"parity", a->parity},
                        {"ng", grid},
                        {"energies_GHz", f.energies},
                        {"epsilon0_GHz", fit.epsilon0},
                        {"t_dispersion_GHz", fit.t},
                        {"dispersion_peak_to_peak_GHz", fit.peak_to_peak},
                        {"cosine_relative_residual", fit.relative_residual()},
                        {"epsilon0_wannier_GHz", be.epsilon0},
                        {"t_wannier_GHz", be.t},
                        {"centre_rad", w.centre},
                        {"closure_phase_rad", f.closure_phase},
                        {"norm", w.norm},
                        {"tail_norm", w.tail_norm},
                        {"imag_residual", w.imag_residual},
                        {"participation_width_rad", w.participation_width},
                        {"min_overlap", f.min_overlap},
                        {"ambiguous", f.ambiguous},
                        {"note", f.note}};
            run.write_json("wannier_report.json", report);
            if (!a->no_grid) {
                std::ostringstream os;
                os << "theta_rad,phi_rad,re,im\n";
                for (std::size_t r = 0; r < w.theta.size(); ++r)
                    for (std::size_t q = 0; q < w.phi.size(); ++q) {
                        const cplx v = w.values(static_cast<long>(r), static_cast<long>(q));
                        os << format_double(w.theta[r]) << "," << format_double(w.phi[q]) << ","
                           << format_double(v.real()) << "," << format_double(v.imag()) << "\n";
                    }
                run.write_text("wannier_grid.csv", os.str());
            }
            run.finish();
            return 0;
        };
    });
}

// ---------------------------------------------------------------- raman and sequence

raman::LambdaSystem system_from_json(const json& j)
{
    const std::string what = "system";
    check_keys(j, {"omega_1_GHz", "omega_2_GHz", "Gamma_10_per_us", "Gamma_12_per_us", "Gamma_1_phi_per_us"}, what);
    raman::LambdaSystem s;
    s.omega_1 = two_pi * number_or(j, "omega_1_GHz", 0.0, what);
    s.omega_2 = two_pi * number_or(j, "omega_2_GHz", 0.0, what);
    s.Gamma_10 = number_or(j, "Gamma_10_per_us", 0.0, what);
    s.Gamma_12 = number_or(j, "Gamma_12_per_us", 0.0, what);
    s.Gamma_1_phi = number_or(j, "Gamma_1_phi_per_us", 0.0, what);
    s.validate();
    return s;
}

raman::LindbladOptions lindblad_from_json(const json& j)
{
    raman::LindbladOptions o;
    const std::string conv = string_or(j, "dephasing_convention", "half_rate", "config");
    if (conv == "full_rate") o.dephasing = raman::DephasingConvention::full_rate;
    else if (conv != "half_rate") throw ValidationError("config: dephasing_convention must be half_rate or full_rate");
    if (j.contains("channels")) {
        for (const auto& ch : j.at("channels")) {
            check_keys(ch, {"from", "to", "rate_per_us"}, "channel");
            o.extra.push_back({integer_or(ch, "from", -1, "channel"), integer_or(ch, "to", -1, "channel"),
                               number(ch, "rate_per_us", "channel")});
        }
    }
    if (j.contains("readout")) {
        const json& r = j.at("readout");
        if (!r.is_array() || r.size() != 3) throw ValidationError("config: readout must hold 3 weights");
        for (int i = 0; i < 3; ++i) o.readout[i] = r[i].get<double>();
    }
    o.two_photon_detuning = two_pi * number_or(j, "two_photon_detuning_MHz", 0.0, "config");
    o.rtol = number_or(j, "rtol", o.rtol, "config");
    o.atol = number_or(j, "atol", o.atol, "config");
    return o;
}

raman::Pulse pulse_from_json(const json& j)
{
    const std::string what = "pulse";
    check_keys(j, {"shape", "amplitude_MHz", "start_us", "stop_us", "centre_us", "sigma_us", "phase_rad"}, what);
    const std::string shape = string_or(j, "shape", "square", what);
    const double amp = two_pi * number(j, "amplitude_MHz", what);
    const double phase = number_or(j, "phase_rad", 0.0, what);
    raman::Pulse p;
    if (shape == "square") p = raman::Pulse::square(number(j, "start_us", what), number(j, "stop_us", what), amp, phase);
    else if (shape == "gaussian")
        p = raman::Pulse::gaussian(number(j, "centre_us", what), number(j, "sigma_us", what), amp, phase);
    else throw ValidationError(what + ": shape must be square or gaussian");
    p.validate();
    return p;
}

void add_raman(CLI::App& app, RunConfig& cfg, std::function<int()>& action)
{
    auto* sub = app.add_subcommand("raman", "Lambda-system dynamics under a pulse schedule, or an amplitude map");
    auto path = std::make_shared<std::string>();
    sub->add_option("schedule", *path, "schedule JSON")->required();
    sub->callback([&cfg, &action, path] {
        action = [&cfg, path] {
            RunConfig c = cfg;
            c.subcommand = "raman";
            c.inputs = {*path};
            const json j = load_primary(c);
            check_keys(j, {"system", "Delta_MHz", "alpha", "beta", "time", "amplitude_map", "dephasing_convention",
                           "channels", "readout", "two_photon_detuning_MHz", "rtol", "atol"},
                       "schedule");
            const auto sys = system_from_json(j.value("system", json::object()));
            const double Delta = two_pi * number(j, "Delta_MHz", "schedule");
            const auto opt = lindblad_from_json(j);
            Run run(c);
            run.set_config_json(j);

            if (j.contains("amplitude_map")) {
                const json& m = j.at("amplitude_map");
                check_keys(m, {"sigma_us", "alpha_MHz", "beta_MHz"}, "amplitude_map");
                const double sigma = number(m, "sigma_us", "amplitude_map");
                auto oa = grid_from_json(m.at("alpha_MHz"), "amplitude_map.alpha_MHz");
                auto ob = grid_from_json(m.at("beta_MHz"), "amplitude_map.beta_MHz");
                if (c.dry_run) return dry_run_done(run);
                std::vector<double> ra, rb;
                for (double v : oa) ra.push_back(two_pi * v);
                for (double v : ob) rb.push_back(two_pi * v);
                Stopwatch sw;
                const RMatrix map = raman::amplitude_map(sys, Delta, sigma, ra, rb, opt, c.workers);
                run.time("amplitude_map", sw.seconds());
                std::ostringstream os;
                os << "Omega_alpha_MHz,Omega_beta_MHz,p2\n";
                for (std::size_t a = 0; a < oa.size(); ++a)
                    for (std::size_t b = 0; b < ob.size(); ++b)
                        os << format_double(oa[a]) << "," << format_double(ob[b]) << ","
                           << format_double(map(static_cast<long>(a), static_cast<long>(b))) << "\n";
                run.write_text("amplitude_map.csv", os.str());
                run.finish();
                return 0;
            }

            raman::PulseSchedule sched;
            for (const auto& pj : j.value("alpha", json::array())) sched.alpha.push_back(pulse_from_json(pj));
            for (const auto& pj : j.value("beta", json::array())) sched.beta.push_back(pulse_from_json(pj));
            sched.validate();
            if (!j.contains("time")) throw ValidationError("schedule: missing field 'time'");
            const auto t = grid_from_json(j.at("time"), "schedule.time");
            if (c.dry_run) return dry_run_done(run);
            Stopwatch sw;
            const auto tr = raman::lindblad_evolve(sys, sched, Delta, t, opt);
            run.time("evolve", sw.seconds());
            std::ostringstream os;
            os << "t_us,p0,p1,p2,signal\n";
            for (std::size_t i = 0; i < tr.t.size(); ++i)
                os << format_double(tr.t[i]) << "," << format_double(tr.populations[i][0]) << ","
                   << format_double(tr.populations[i][1]) << "," << format_double(tr.populations[i][2]) << ","
                   << format_double(tr.signal[i]) << "\n";
            run.write_text("trajectory.csv", os.str());
            run.write_json("raman_summary.json", {{"max_trace_error", tr.max_trace_error},
                                                  {"min_eigenvalue", tr.min_eigenvalue},
                                                  {"steps", tr.steps},
                                                  {"final_populations", tr.populations.back()}});
            run.finish();
            return 0;
        };
    });
}

void add_sequence(CLI::App& app, RunConfig& cfg, std::function<int()>& action)
{
    auto* sub = app.add_subcommand("sequence", "Rabi, T1, Ramsey or echo sequence with decay fit");
    auto path = std::make_shared<std::string>();
    sub->add_option("config", *path, "sequence JSON")->required();
    sub->callback([&cfg, &action, path] {
        action = [&cfg, path] {
            RunConfig c = cfg;
            c.subcommand = "sequence";
            c.inputs = {*path};
            const json j = load_primary(c);
            check_keys(j, {"kind", "system", "Delta_MHz", "sigma_us", "pi_amplitude_MHz", "pi2_amplitude_MHz",
                           "grid_us", "grid_MHz", "dephasing_convention", "channels", "readout",
                           "two_photon_detuning_MHz", "rtol", "atol"},
                       "sequence");
            raman::SequenceConfig sc;
            sc.kind = raman::sequence_kind_from_string(string_or(j, "kind", "", "sequence"));
            sc.system = system_from_json(j.value("system", json::object()));
            sc.Delta = two_pi * number(j, "Delta_MHz", "sequence");
            sc.sigma = number_or(j, "sigma_us", sc.sigma, "sequence");
            sc.pi_amplitude = two_pi * number_or(j, "pi_amplitude_MHz", 0.0, "sequence");
            sc.pi2_amplitude = two_pi * number_or(j, "pi2_amplitude_MHz", 0.0, "sequence");
            const bool in_time = sc.kind == raman::SequenceKind::t1 || sc.kind == raman::SequenceKind::ramsey ||
                                 sc.kind == raman::SequenceKind::echo;
            const std::string key = in_time ? "grid_us" : "grid_MHz";
            if (!j.contains(key)) throw ValidationError("sequence: missing field '" + key + "'");
            sc.grid = grid_from_json(j.at(key), "sequence." + key);
            if (!in_time)
                for (double& v : sc.grid) v *= two_pi;
            sc.lindblad = lindblad_from_json(j);
            sc.workers = c.workers;
            Run run(c);
            run.set_config_json(j);
            if (c.dry_run) return dry_run_done(run);
            Stopwatch sw;
            const auto r = raman::simulate_sequence(sc);
            run.time("simulate", sw.seconds());
            std::ostringstream os;
            os << (in_time ? "t_us" : "x_MHz") << ",signal,p2\n";
            for (std::size_t i = 0; i < r.x.size(); ++i)
                os << format_double(in_time ? r.x[i] : r.x[i] / two_pi) << "," << format_double(r.signal[i]) << ","
                   << format_double(r.p2[i]) << "\n";
            run.write_text("sequence.csv", os.str());
            json summary{{"kind", raman::to_string(r.kind)},
                         {"pi_amplitude_MHz", r.pi_amplitude / two_pi},
                         {"pi2_amplitude_MHz", r.pi2_amplitude / two_pi},
                         {"pi_transfer", r.pi_transfer}};
            if (in_time) {
                const auto model =
                    sc.kind == raman::SequenceKind::ramsey ? raman::DecayModel::exp_cos : raman::DecayModel::exp;
                const auto f = raman::fit_decay(r.x, r.signal, model);
                summary["fit"] = {{"model", model == raman::DecayModel::exp ? "exp" : "exp_cos"},
                                  {"rate_per_us", f.rate},
                                  {"time_constant_us", f.rate > 0 ? 1.0 / f.rate : 0.0},
                                  {"amplitude", f.amplitude},
                                  {"offset", f.offset},
                                  {"frequency_MHz", f.frequency / two_pi},
                                  {"phase_rad", f.phase},
                                  {"residual_rms", f.residual_rms},
                                  {"converged", f.converged}};
            }
            run.write_json("sequence_summary.json", summary);
            run.time("fit", sw.seconds());
            run.finish();
            return 0;
        };
    });
}

// ---------------------------------------------------------------- synth and fit

struct SynthArgs {
    std::string params;
    std::vector<double> ng{0.0, 0.25};
    int points = 30;
    double flux_from = 0.0;
    double flux_to = 0.5;
    int transitions = 8;
    double noise_mhz = 0.0;
    bool unlabeled = false;
};

fitcore::FitSettings settings_from_json(const json& j)
{
    fitcore::FitSettings s;
    if (!j.contains("settings")) return s;
    const json& o = j.at("settings");
    const std::string what = "settings";
    check_keys(o, {"n_theta_max", "n_phi_max", "converge_basis", "k_levels", "resonator", "f_r_GHz", "Z_r_ohm",
                   "n_photon_max", "window_MHz", "penalty_MHz", "visibility_floor", "fit_g", "max_evaluations",
                   "restarts", "polish", "lm_iterations"},
               what);
    s.basis = {integer_or(o, "n_theta_max", s.basis.n_theta_max, what),
               integer_or(o, "n_phi_max", s.basis.n_phi_max, what)};
    s.basis.validate();
    s.converge_basis = o.value("converge_basis", s.converge_basis);
    s.k_levels = integer_or(o, "k_levels", s.k_levels, what);
    s.resonator = o.value("resonator", s.resonator);
    s.resonator_params.f_r = number_or(o, "f_r_GHz", s.resonator_params.f_r, what);
    s.resonator_params.Z_r = number_or(o, "Z_r_ohm", s.resonator_params.Z_r, what);
    s.resonator_params.n_photon_max = integer_or(o, "n_photon_max", s.resonator_params.n_photon_max, what);
    s.resonator_params.validate();
    s.window_ghz = number_or(o, "window_MHz", s.window_ghz * 1e3, what) * 1e-3;
    s.penalty_ghz = number_or(o, "penalty_MHz", s.penalty_ghz * 1e3, what) * 1e-3;
    s.visibility_floor = number_or(o, "visibility_floor", s.visibility_floor, what);
    s.fit_g = o.value("fit_g", s.fit_g);
    s.simplex.max_evaluations = integer_or(o, "max_evaluations", s.simplex.max_evaluations, what);
    s.simplex.restarts = integer_or(o, "restarts", s.simplex.restarts, what);
    s.polish = o.value("polish", s.polish);
    s.lm.max_iterations = integer_or(o, "lm_iterations", s.lm.max_iterations, what);
    return s;
}

void add_synth(CLI::App& app, RunConfig& cfg, std::function<int()>& action)
{
    auto* sub = app.add_subcommand("synth", "Synthetic spectroscopy scans from known parameters");
    auto a = std::make_shared<SynthArgs>();
    sub->add_option("params", a->params, "parameter JSON (may carry fit settings)")->required();
    sub->add_option("--ng", a->ng, "offset charge of each scan");
    sub->add_option("--points", a->points, "flux points per scan");
    sub->add_option("--flux-from", a->flux_from, "first flux (flux quanta)");
    sub->add_option("--flux-to", a->flux_to, "last flux");
    sub->add_option("--transitions", a->transitions, "lines 0 -> 1 .. 0 -> n per flux point");
    sub->add_option("--noise-MHz", a->noise_mhz, "gaussian frequency noise");
    sub->add_flag("--unlabeled", a->unlabeled, "omit transition labels");
    sub->callback([&cfg, &action, a] {
        action = [&cfg, a] {
            RunConfig c = cfg;
            c.subcommand = "synth";
            c.inputs = {a->params};
            json j = load_primary(c);
            json settings = j.contains("settings") ? j.at("settings") : json(nullptr);
            auto s = settings_from_json(j);
            s.workers = c.workers;
            j.erase("settings");
            const ZeroPiParams p = params_from_json(j);
            if (a->points < 1) throw ValidationError("--points must be >= 1");
            if (!(a->noise_mhz >= 0)) throw ValidationError("--noise-MHz must be >= 0");
            Run run(c);
            run.set_config_json({{"params", j},
                                 {"settings", settings},
                                 {"ng", a->ng},
                                 {"points", a->points},
                                 {"flux", {a->flux_from, a->flux_to}},
                                 {"transitions", a->transitions},
                                 {"noise_MHz", a->noise_mhz},
                                 {"labeled", !a->unlabeled}});
            if (c.dry_run) return dry_run_done(run);
            Stopwatch sw;
            for (std::size_t i = 0; i < a->ng.size(); ++i) {
                fitcore::SyntheticOptions o;
                o.n_g = a->ng[i];
                o.flux = linspace(a->flux_from, a->flux_to, a->points);
                o.transitions = a->transitions;
                o.labeled = !a->unlabeled;
                o.noise_ghz = a->noise_mhz * 1e-3;
                o.seed = c.seed + i;
                const auto d = fitcore::synthetic_dataset(p, o, s);
                std::ostringstream os;
                fitcore::write_dataset(d, os);
                run.write_text("scan_" + std::to_string(i) + ".csv", os.str());
            }
            run.time("generate", sw.seconds());
            run.finish();
            return 0;
        };
    });
}

optimize::Bounds bounds_from_json(const json& j, const ZeroPiParams& init, bool with_g)
{
    optimize::Bounds b = fitcore::default_bounds(init, with_g);
    if (!j.contains("bounds")) return b;
    const json& o = j.at("bounds");
    static const std::vector<std::string> keys{"E_C_phi_GHz", "E_C_theta_GHz", "E_J_GHz",   "E_L_GHz",
                                               "dE_J_GHz",    "beta_phi",      "beta_theta", "g_phi_theta_rad_per_ns"};
    check_keys(o, keys, "bounds");
    for (int i = 0; i < static_cast<int>(b.lower.size()); ++i) {
        if (!o.contains(keys[i])) continue;
        const json& r = o.at(keys[i]);
        if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
            throw ValidationError("bounds: '" + keys[i] + "' must be [lower, upper]");
        b.lower[i] = r[0].get<double>();
        b.upper[i] = r[1].get<double>();
    }
    return b;
}

void add_fit(CLI::App& app, RunConfig& cfg, std::function<int()>& action)
{
    auto* sub = app.add_subcommand("fit", "Multivariate fit of the Hamiltonian to spectroscopy scans");
    auto data = std::make_shared<std::vector<std::string>>();
    auto init = std::make_shared<std::string>();
    sub->add_option("datasets", *data, "dataset CSV files")->required();
    sub->add_option("--init", *init, "initial parameters, bounds and settings JSON")->required();
    sub->callback([&cfg, &action, data, init] {
        action = [&cfg, data, init] {
            RunConfig c = cfg;
            c.subcommand = "fit";
            c.inputs = {*init};
            for (const auto& d : *data) c.inputs.push_back(d);
            json j = load_primary(c);
            auto s = settings_from_json(j);
            s.workers = c.workers;
            s.simplex.seed = c.seed;
            const json params = [&] {
                json p = j;
                p.erase("settings");
                p.erase("bounds");
                return p;
            }();
            fitcore::FitProblem problem{params_from_json(params), {}, s};
            problem.bounds = bounds_from_json(j, problem.initial, s.fit_g);
            problem.validate();
            std::vector<fitcore::SpectroscopyDataset> sets;
            for (const auto& d : *data) sets.push_back(fitcore::load_dataset(d));
            Run run(c);
            run.set_config_json(j);
            if (c.dry_run) return dry_run_done(run);
            Stopwatch sw;
            const auto r = fitcore::fit_spectrum(problem, sets);
            run.time("fit", sw.seconds());

            json points = json::array();
            long row = 0;
            for (const auto& a : r.report.assignments) {
                const auto& pt = sets[a.dataset].points[a.point];
                points.push_back({{"dataset", a.dataset},
                                  {"line", pt.line},
                                  {"flux_phi0", pt.flux},
                                  {"ng", pt.n_g},
                                  {"freq_GHz", pt.frequency},
                                  {"model_GHz", a.model_frequency},
                                  {"residual_GHz", r.report.residuals[row++]},
                                  {"from", a.from},
                                  {"to", a.to},
                                  {"excluded", a.excluded}});
            }
            json out{{"best", params_to_json(r.best)},
                     {"metric_GHz2", r.metric},
                     {"converged", r.converged},
                     {"status", r.status},
                     {"evaluations", r.evaluations},
                     {"basis", {{"n_theta_max", r.basis.n_theta_max}, {"n_phi_max", r.basis.n_phi_max}}},
                     {"basis_shift_GHz", r.basis_shift_ghz},
                     {"trace", r.trace},
                     {"points", points}};
            run.write_json("fit_result.json", out);
            run.finish();
            return r.converged ? 0 : 4;
        };
    });
}

}  // namespace

void register_commands(CLI::App& app, RunConfig& cfg, std::function<int()>& action)
{
    add_quantize(app, cfg, action);
    add_spectrum(app, cfg, action);
    add_matrix_elements(app, cfg, action);
    add_wannier(app, cfg, action);
    add_raman(app, cfg, action);
    add_sequence(app, cfg, action);
    add_synth(app, cfg, action);
    add_fit(app, cfg, action);
}

}  // namespace zeropi::cli
